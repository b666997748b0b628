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

namespace assocbias {

/// Standard normal CDF. Throws NonFiniteError for NaN or infinite z.
double normal_cdf(double z);

/// 2 (1 - Phi(|z|)), evaluated through the lower tail so small p keep precision.
double two_tailed_p(double z);

} // namespace assocbias
