#pragma once

#include "rramcap/capacity.hpp"
#include "rramcap/channel.hpp"
#include "rramcap/errors.hpp"
#include "rramcap/monte_carlo.hpp"
#include "rramcap/normal.hpp"
#include "rramcap/seeding.hpp"
#include "rramcap/survey.hpp"
#include "rramcap/sweep.hpp"
