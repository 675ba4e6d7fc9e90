// Copyright 2026 The qtn Authors
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

#pragma once

#include "qtn/apps.hpp"
#include "qtn/batch.hpp"
#include "qtn/channels.hpp"
#include "qtn/circuit.hpp"
#include "qtn/diff.hpp"
#include "qtn/errors.hpp"
#include "qtn/gates.hpp"
#include "qtn/ir.hpp"
#include "qtn/kraus.hpp"
#include "qtn/network.hpp"
#include "qtn/optim.hpp"
#include "qtn/pauli.hpp"
#include "qtn/quop.hpp"
#include "qtn/random.hpp"
#include "qtn/statevector.hpp"
#include "qtn/tensor.hpp"
