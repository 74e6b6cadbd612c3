/**
 * @file imop.hpp
 * @brief Umbrella header.
 */

#pragma once

#include "imop/datagen.hpp"
#include "imop/errors.hpp"
#include "imop/io.hpp"
#include "imop/loss.hpp"
#include "imop/milp_export.hpp"
#include "imop/model.hpp"
#include "imop/online.hpp"
#include "imop/oracle.hpp"
#include "imop/parallel.hpp"
#include "imop/qp.hpp"
#include "imop/rng.hpp"
#include "imop/scalarize.hpp"
#include "imop/update.hpp"
