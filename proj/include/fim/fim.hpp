// SPDX-License-Identifier: Apache-2.0
//
// fimsim: beamforming and surface-shape optimization for flexible metasurface arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FIM_FIM_HPP
#define FIM_FIM_HPP

#include "fim/alternating.hpp"
#include "fim/beamforming.hpp"
#include "fim/channel.hpp"
#include "fim/geometry.hpp"
#include "fim/morphing.hpp"

#endif
