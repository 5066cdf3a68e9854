#pragma once

#include "rkde/common.hpp"
#include "rkde/data.hpp"
#include "rkde/estimators.hpp"
#include "rkde/evaluation.hpp"
#include "rkde/influence.hpp"
#include "rkde/io.hpp"
#include "rkde/kernels.hpp"
#include "rkde/loss.hpp"
#include "rkde/rkhs.hpp"
