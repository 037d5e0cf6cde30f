#pragma once

#include "sst/error.hpp"
#include "sst/io.hpp"
#include "sst/kdtree.hpp"
#include "sst/linalg.hpp"
#include "sst/metrics.hpp"
#include "sst/mlp.hpp"
#include "sst/oversegment.hpp"
#include "sst/pipeline.hpp"
#include "sst/proposer.hpp"
#include "sst/refine.hpp"
#include "sst/rng.hpp"
#include "sst/superpool.hpp"
#include "sst/synth.hpp"
#include "sst/tree.hpp"
#include "sst/types.hpp"
