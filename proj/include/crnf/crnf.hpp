#pragma once

// Umbrella header.

#include "crnf/errors.hpp"
#include "crnf/scalar.hpp"
#include "crnf/series.hpp"
#include "crnf/linsolve.hpp"
#include "crnf/model.hpp"
#include "crnf/apply_map.hpp"
#include "crnf/conditions.hpp"
#include "crnf/nf.hpp"
#include "crnf/sym.hpp"
#include "crnf/generate.hpp"
#include "crnf/io.hpp"
