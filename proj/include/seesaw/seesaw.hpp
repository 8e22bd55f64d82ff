#pragma once

#include "seesaw/tensor.hpp"
#include "seesaw/ops.hpp"
#include "seesaw/layers.hpp"
#include "seesaw/blocks.hpp"
#include "seesaw/architectures.hpp"
#include "seesaw/analytics.hpp"
#include "seesaw/serialize.hpp"
#include "seesaw/training.hpp"
#include "seesaw/verification.hpp"
#include "seesaw/dataset.hpp"
