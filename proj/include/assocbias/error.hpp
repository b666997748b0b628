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

#include <stdexcept>
#include <string>

namespace assocbias {

/// Base of every error raised by the toolkit. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define ASSOCBIAS_DEFINE_ERROR(Name)          \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

// input / format
ASSOCBIAS_DEFINE_ERROR(IoError);
ASSOCBIAS_DEFINE_ERROR(ParseError);
ASSOCBIAS_DEFINE_ERROR(ValidationError);

// numerics
ASSOCBIAS_DEFINE_ERROR(ZeroNormError);
ASSOCBIAS_DEFINE_ERROR(DimMismatchError);
ASSOCBIAS_DEFINE_ERROR(EmptySetError);
ASSOCBIAS_DEFINE_ERROR(DegenerateSpreadError);
ASSOCBIAS_DEFINE_ERROR(NonFiniteError);

// meta-analysis
ASSOCBIAS_DEFINE_ERROR(NoContextsError);
ASSOCBIAS_DEFINE_ERROR(InsufficientSamplesError);
ASSOCBIAS_DEFINE_ERROR(ZeroVarianceError);

// masked-LM probing
ASSOCBIAS_DEFINE_ERROR(PlaceholderError);
ASSOCBIAS_DEFINE_ERROR(NonPositiveProbabilityError);
ASSOCBIAS_DEFINE_ERROR(MissingScoreError);

// corpus extraction
ASSOCBIAS_DEFINE_ERROR(DanglingGroupError);
ASSOCBIAS_DEFINE_ERROR(VariantCollisionError);

#undef ASSOCBIAS_DEFINE_ERROR

} // namespace assocbias
