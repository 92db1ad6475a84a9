#pragma once

#include "c2rf/rng.hpp"
#include "c2rf/dataset.hpp"
#include "c2rf/forest.hpp"
#include "c2rf/milp_model.hpp"
#include "c2rf/simplex.hpp"
#include "c2rf/mps.hpp"
#include "c2rf/c2rf_model.hpp"
#include "c2rf/bnb.hpp"
#include "c2rf/presolve.hpp"
#include "c2rf/eval.hpp"
#include "c2rf/synthetic.hpp"
#include "c2rf/pipeline.hpp"
