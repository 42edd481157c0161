// Copyright 2026 The qvrf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QVRF_QVRF_HPP_
#define QVRF_QVRF_HPP_

#include "qvrf/bd_rate.hpp"
#include "qvrf/codec.hpp"
#include "qvrf/entropy_model.hpp"
#include "qvrf/error.hpp"
#include "qvrf/image.hpp"
#include "qvrf/metrics.hpp"
#include "qvrf/range_coder.hpp"
#include "qvrf/rate_control.hpp"
#include "qvrf/sweep.hpp"
#include "qvrf/transform.hpp"

#endif  // QVRF_QVRF_HPP_
