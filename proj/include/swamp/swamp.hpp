#pragma once

#include "channel.hpp"
#include "config.hpp"
#include "harness.hpp"
#include "instance_io.hpp"
#include "model.hpp"
#include "prior.hpp"
#include "rbp.hpp"
#include "rng.hpp"
#include "solve.hpp"
#include "solver.hpp"

namespace swamp {
inline constexpr const char* kVersion = "0.1.0";
}
