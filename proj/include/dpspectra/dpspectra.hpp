//
// Copyright 2026 The dpspectra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPSPECTRA_DPSPECTRA_HPP_
#define DPSPECTRA_DPSPECTRA_HPP_

#include "dpspectra/baselines.hpp"
#include "dpspectra/data_io.hpp"
#include "dpspectra/errors.hpp"
#include "dpspectra/harness.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/mechanisms.hpp"
#include "dpspectra/mp_law.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/report_json.hpp"
#include "dpspectra/sensitivity.hpp"
#include "dpspectra/spectral_oracle.hpp"
#include "dpspectra/spiked_model.hpp"
#include "dpspectra/stats.hpp"

#endif  // DPSPECTRA_DPSPECTRA_HPP_
