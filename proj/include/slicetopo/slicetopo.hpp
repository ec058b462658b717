// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slicetopo/binary_io.hpp"
#include "slicetopo/classifier.hpp"
#include "slicetopo/datagen.hpp"
#include "slicetopo/dataset.hpp"
#include "slicetopo/descriptor.hpp"
#include "slicetopo/error.hpp"
#include "slicetopo/evaluate.hpp"
#include "slicetopo/library.hpp"
#include "slicetopo/pointcloud.hpp"
#include "slicetopo/recognition.hpp"
#include "slicetopo/rng.hpp"
#include "slicetopo/slicing.hpp"
#include "slicetopo/topology.hpp"
#include "slicetopo/vectorize.hpp"
#include "slicetopo/view_normalize.hpp"
