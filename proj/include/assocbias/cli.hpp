/*******************************************************************************
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
 *******************************************************************************/

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace assocbias::cli {

enum ExitCode : int {
    kOk = 0,
    kComputationError = 1,  // numeric failure (degenerate spread, missing scores, ...)
    kInputError = 2,        // usage, missing files, malformed or invalid input
    kInternalError = 3,
};

/// Runs the command line `args` (args[0] is the program name). Results go to
/// files or `out`; diagnostics go to `err` only.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace assocbias::cli
