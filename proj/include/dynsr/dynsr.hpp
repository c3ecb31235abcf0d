#pragma once

#include "dynsr/adcg.hpp"
#include "dynsr/analysis.hpp"
#include "dynsr/datagen.hpp"
#include "dynsr/discretize.hpp"
#include "dynsr/experiments.hpp"
#include "dynsr/geometry.hpp"
#include "dynsr/io.hpp"
#include "dynsr/measures.hpp"
#include "dynsr/metrics.hpp"
#include "dynsr/pipeline.hpp"
#include "dynsr/solver.hpp"
#include "dynsr/svg.hpp"
#include "dynsr/types.hpp"
