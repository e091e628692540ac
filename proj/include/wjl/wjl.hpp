#pragma once

#include "wjl/core_types.hpp"
#include "wjl/error.hpp"
#include "wjl/generators.hpp"
#include "wjl/hashing.hpp"
#include "wjl/norms.hpp"
#include "wjl/oracle.hpp"
#include "wjl/projection.hpp"
#include "wjl/random.hpp"
#include "wjl/sketch.hpp"
#include "wjl/version.hpp"
