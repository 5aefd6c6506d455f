#pragma once

#include "cftp/ashe.hpp"
#include "cftp/common.hpp"
#include "cftp/event.hpp"
#include "cftp/lp.hpp"
#include "cftp/queueing.hpp"
#include "cftp/rational.hpp"
#include "cftp/rng.hpp"
#include "cftp/sampler.hpp"
#include "cftp/state.hpp"
#include "cftp/stationary.hpp"
#include "cftp/store.hpp"
#include "cftp/zones.hpp"
