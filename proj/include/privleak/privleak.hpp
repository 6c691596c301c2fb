#pragma once

#include "privleak/errors.hpp"
#include "privleak/tolerances.hpp"
#include "privleak/numerics.hpp"
#include "privleak/noise.hpp"
#include "privleak/lti_model.hpp"
#include "privleak/chapman_robbins.hpp"
#include "privleak/directions.hpp"
#include "privleak/privacy_utility.hpp"
#include "privleak/monte_carlo.hpp"
