// Copyright 2026 The cvcluster Authors
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

#pragma once

#include "cvcluster/cluster_graph.hpp"
#include "cvcluster/error_model.hpp"
#include "cvcluster/errors.hpp"
#include "cvcluster/experiment.hpp"
#include "cvcluster/fock.hpp"
#include "cvcluster/gates.hpp"
#include "cvcluster/gaussian_state.hpp"
#include "cvcluster/homodyne.hpp"
#include "cvcluster/mbqc.hpp"
#include "cvcluster/phase_space.hpp"
#include "cvcluster/random.hpp"
#include "cvcluster/serialization.hpp"
#include "cvcluster/validation.hpp"
