#pragma once

#include "pahires/bvh.hpp"
#include "pahires/checkpoint.hpp"
#include "pahires/config.hpp"
#include "pahires/error.hpp"
#include "pahires/graph.hpp"
#include "pahires/kinematics.hpp"
#include "pahires/loss.hpp"
#include "pahires/metrics.hpp"
#include "pahires/model.hpp"
#include "pahires/motion.hpp"
#include "pahires/optimizer.hpp"
#include "pahires/tasks.hpp"
#include "pahires/tensor.hpp"
#include "pahires/train.hpp"
