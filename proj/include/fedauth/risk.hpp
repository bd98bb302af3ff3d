/*
 * Copyright 2026 The fedauth Authors
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

// Proportionality risk model comparing the static-key and federated
// postures, plus the four-row comparison report. Scores are relative units
// (proportionality constants fixed at 1), not probabilities.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "fedauth/error.hpp"

namespace fedauth::risk {

/// One year in seconds under the 365.25-day convention (8766 hours).
inline constexpr double kSecondsPerYear = 8766.0 * 3600.0;

struct RiskParameters {
    double n_keys = 0;    // static keys in circulation
    double t_long = 0;    // mean static-credential lifetime, seconds
    double i_blast = 0;   // blast-radius index, dimensionless weight >= 0
    double n_auths = 0;   // federated authentication events
    double t_short = 0;   // mean token lifetime, seconds
    double i_scoped = 0;  // scoped-impact index, dimensionless weight >= 0
    double n_idp = 0;     // trusted identity providers

    static RiskParameters demo_defaults();
    static Result<RiskParameters> from_json(const nlohmann::json& doc);
    [[nodiscard]] nlohmann::json to_json() const;
};

double risk_legacy(const RiskParameters& p);
double risk_wif(const RiskParameters& p);

struct ComparisonRow {
    std::string factor;
    std::string legacy;
    std::string federated;
    std::string mechanism;
};

struct ComparisonReport {
    std::array<ComparisonRow, 4> rows;
    double r_legacy = 0;
    double r_wif = 0;
    std::string footnote;

    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

ComparisonReport complexity_report(const RiskParameters& p);

/// Human-readable lifetime band ("minutes", "hours", "days", "months to
/// years") used in the lifetime row.
std::string lifetime_band(double seconds);

}  // namespace fedauth::risk
