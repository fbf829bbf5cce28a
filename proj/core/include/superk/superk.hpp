#pragma once

#include "superk/dataset.hpp"
#include "superk/error.hpp"
#include "superk/eval.hpp"
#include "superk/matrix.hpp"
#include "superk/model_io.hpp"
#include "superk/random.hpp"
#include "superk/tessellation.hpp"
#include "superk/training.hpp"
#include "superk/voxelize.hpp"
