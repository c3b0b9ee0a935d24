// SPDX-License-Identifier: Apache-2.0
//
// gbscm - matrix-form geometry-based stochastic MIMO channel simulation
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

#pragma once

#include <stdexcept>
#include <string>

namespace gbscm
{

// Raised for any argument that violates an operation's preconditions.
// The message is prefixed by the module that detected the violation.
class invalid_parameter : public std::invalid_argument
{
public:
    invalid_parameter(const std::string &module, const std::string &what)
        : std::invalid_argument(module + ": " + what), module_(module) {}

    const std::string &module() const noexcept { return module_; }

private:
    std::string module_;
};

} // namespace gbscm
