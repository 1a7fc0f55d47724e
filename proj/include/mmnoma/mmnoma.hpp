// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmnoma/allocation.hpp"
#include "mmnoma/beamformer.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/channel_io.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/csv.hpp"
#include "mmnoma/linalg.hpp"
#include "mmnoma/oracle.hpp"
#include "mmnoma/pipeline.hpp"
#include "mmnoma/rate.hpp"
