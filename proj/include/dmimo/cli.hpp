// SPDX-License-Identifier: Apache-2.0
//
// dmimo-channel: spatially consistent D-MIMO channel simulation for industrial halls
// Copyright (C) 2026 The dmimo-channel authors
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


#ifndef DMIMO_CLI_HPP
#define DMIMO_CLI_HPP

#include <iosfwd>

namespace dmimo::cli
{

enum ExitCode : int
{
    kOk = 0,
    kValidationFailed = 1,
    kConfigError = 2,
    kIoError = 3,
    kCorrupt = 4,
};

// Entry point of the `dmimo` tool; returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace dmimo::cli

#endif
