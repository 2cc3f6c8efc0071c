/*
 * Copyright (c) 2026, The STRIDE Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "stride/common.hpp"
#include "stride/rng.hpp"
#include "stride/spectral_noise.hpp"
#include "stride/npy.hpp"
#include "stride/patch_pca.hpp"
#include "stride/stride_inject.hpp"
#include "stride/toy_generator.hpp"
#include "stride/diversity_metrics.hpp"
#include "stride/experiment.hpp"
