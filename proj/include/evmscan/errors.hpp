// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace evmscan
{
/// Root of every error the library throws. Input errors are problems with
/// user-supplied data (bad hex, bad files); everything else is internal.
class Error : public std::runtime_error
{
public:
    Error(const std::string& what, bool input_error)
      : std::runtime_error(what), input_error_(input_error)
    {}

    bool is_input_error() const noexcept { return input_error_; }

private:
    bool input_error_;
};

#define EVMSCAN_DEFINE_ERROR(Name, is_input)                                             \
    class Name : public Error                                                            \
    {                                                                                    \
    public:                                                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what, is_input) {}   \
    }

EVMSCAN_DEFINE_ERROR(MalformedHex, true);
EVMSCAN_DEFINE_ERROR(EmptyCorpus, true);
EVMSCAN_DEFINE_ERROR(CorpusTooSmall, true);
EVMSCAN_DEFINE_ERROR(CorpusFormatError, true);
EVMSCAN_DEFINE_ERROR(WeightFormatError, true);
EVMSCAN_DEFINE_ERROR(BundleFormatError, true);
EVMSCAN_DEFINE_ERROR(VocabError, false);
EVMSCAN_DEFINE_ERROR(LengthError, false);
EVMSCAN_DEFINE_ERROR(DegenerateLabels, true);
EVMSCAN_DEFINE_ERROR(EmptyTrainingSet, true);
EVMSCAN_DEFINE_ERROR(FeatureDimError, false);
EVMSCAN_DEFINE_ERROR(ConfigError, true);

#undef EVMSCAN_DEFINE_ERROR

}  // namespace evmscan
