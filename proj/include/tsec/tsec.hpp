#pragma once

#include "tsec/grid.hpp"
#include "tsec/spectral.hpp"
#include "tsec/forms.hpp"
#include "tsec/hodge.hpp"
#include "tsec/flow.hpp"
#include "tsec/level_set.hpp"
#include "tsec/poincare.hpp"
#include "tsec/harmonic_verify.hpp"
#include "tsec/simplex.hpp"
#include "tsec/section_search.hpp"
#include "tsec/expr.hpp"
#include "tsec/config.hpp"
#include "tsec/commands.hpp"
