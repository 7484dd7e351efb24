#pragma once

#include "ringeq/core.hpp"
#include "ringeq/kernel.hpp"
#include "ringeq/linsys.hpp"
#include "ringeq/oracle.hpp"
#include "ringeq/ring_system.hpp"
#include "ringeq/roots.hpp"
#include "ringeq/solve.hpp"
#include "ringeq/verify.hpp"
