#pragma once

#include "risd2d/numerics.hpp"
#include "risd2d/channel.hpp"
#include "risd2d/closedform.hpp"
#include "risd2d/montecarlo.hpp"
#include "risd2d/gaopt.hpp"
