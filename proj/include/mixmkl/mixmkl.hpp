#pragma once

#include "mixmkl/bounds.hpp"
#include "mixmkl/chain.hpp"
#include "mixmkl/data.hpp"
#include "mixmkl/json_io.hpp"
#include "mixmkl/kernels.hpp"
#include "mixmkl/mkl.hpp"
#include "mixmkl/pool.hpp"
#include "mixmkl/verify.hpp"
#include "mixmkl/version.hpp"
