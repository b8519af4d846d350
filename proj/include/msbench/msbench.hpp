/*
 Copyright 2026 the msbench authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include "msbench/dataset.hpp"
#include "msbench/error.hpp"
#include "msbench/eval.hpp"
#include "msbench/formats.hpp"
#include "msbench/geometry.hpp"
#include "msbench/imageproc.hpp"
#include "msbench/parallel.hpp"
#include "msbench/pnm.hpp"
