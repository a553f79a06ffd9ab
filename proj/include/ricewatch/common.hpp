/*
 * Copyright 2026 the ricewatch authors
 *
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
 */

#pragma once

#include <stdexcept>
#include <string>

namespace ricewatch {

inline constexpr const char* kToolVersion = "0.1.0";

/// Day offsets are counted from May 1 (day 0); the season closes Dec 15.
inline constexpr int kSeasonEndDay = 228;

/// Sentinel for absent extremum/fit features; far outside any dB range so
/// tree splits can isolate absence.
inline constexpr double kAbsentSentinel = -9999.0;

inline constexpr double kSquareMetersPerAcre = 4046.8564224;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define RICEWATCH_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& msg) : Error(msg) {}          \
    }

RICEWATCH_DEFINE_ERROR(InvalidSeries);
RICEWATCH_DEFINE_ERROR(InsufficientData);
RICEWATCH_DEFINE_ERROR(WindowError);
RICEWATCH_DEFINE_ERROR(GridMismatch);
RICEWATCH_DEFINE_ERROR(EmptyMask);
RICEWATCH_DEFINE_ERROR(PlotTooSmall);
RICEWATCH_DEFINE_ERROR(StratificationError);
RICEWATCH_DEFINE_ERROR(DegenerateTraining);
RICEWATCH_DEFINE_ERROR(SchemaError);
RICEWATCH_DEFINE_ERROR(InputError);
RICEWATCH_DEFINE_ERROR(UndefinedCorrelation);
RICEWATCH_DEFINE_ERROR(ConfigError);
RICEWATCH_DEFINE_ERROR(IoError);

#undef RICEWATCH_DEFINE_ERROR

}  // namespace ricewatch
