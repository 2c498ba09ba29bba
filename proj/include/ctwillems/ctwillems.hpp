/*
 Copyright 2026 The ctwillems Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include "ctwillems/errors.hpp"
#include "ctwillems/excitation.hpp"
#include "ctwillems/experiment.hpp"
#include "ctwillems/hankel.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/io.hpp"
#include "ctwillems/linalg.hpp"
#include "ctwillems/lti.hpp"
#include "ctwillems/reconstruct.hpp"
#include "ctwillems/rng.hpp"
#include "ctwillems/signal.hpp"
