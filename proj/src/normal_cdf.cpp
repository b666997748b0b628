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

#include "assocbias/normal_cdf.hpp"

#include "assocbias/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace assocbias {

double normal_cdf(double z) {
    if (!std::isfinite(z)) throw NonFiniteError("normal_cdf argument is not finite");
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double two_tailed_p(double z) {
    if (!std::isfinite(z)) throw NonFiniteError("z statistic is not finite");
    return std::min(1.0, 2.0 * normal_cdf(-std::abs(z)));
}

} // namespace assocbias
