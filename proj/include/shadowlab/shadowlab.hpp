#pragma once

#include "shadowlab/bodies.hpp"
#include "shadowlab/congruence.hpp"
#include "shadowlab/descriptor.hpp"
#include "shadowlab/errors.hpp"
#include "shadowlab/estimators.hpp"
#include "shadowlab/experiment.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/nearest_point.hpp"
#include "shadowlab/parallel.hpp"
#include "shadowlab/polytope.hpp"
#include "shadowlab/random.hpp"
#include "shadowlab/report.hpp"
#include "shadowlab/strata.hpp"
