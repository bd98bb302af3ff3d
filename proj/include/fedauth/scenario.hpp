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

// Scenario harness: end-to-end flows and threat cases as data. A scenario
// is a YAML document with a setup block (identity providers, pods, trust
// configuration, static keys) and an action script whose every step carries
// an expected outcome. Runs are deterministic: fake clock, seeded id
// generator, in-process services.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedauth/error.hpp"

namespace fedauth::harness {

struct ExpectedOutcome {
    enum class Kind { Ok, Allow, Deny, Accept, Reject, Error };

    Kind kind = Kind::Ok;
    std::optional<Errc> code;   // expected error code
    std::optional<Errc> cause;  // expected inner cause, when stated

    /// "ok" | "allow" | "deny" | "accept" | "reject" |
    /// "error:<Code>" | "error:<Code>/<Cause>"
    static Result<ExpectedOutcome> parse(const std::string& text);
    [[nodiscard]] std::string to_string() const;
};

struct Outcome {
    ExpectedOutcome::Kind kind = ExpectedOutcome::Kind::Ok;
    std::optional<Errc> code;
    std::optional<Errc> cause;
    std::string detail;

    [[nodiscard]] std::string to_string() const;
};

bool outcome_matches(const ExpectedOutcome& expected, const Outcome& actual);

struct ScenarioStep {
    std::string action;
    nlohmann::json args;
    ExpectedOutcome expect;
};

struct Scenario {
    std::string name;
    std::string description;
    uint64_t seed = 1;
    nlohmann::json setup;
    std::vector<ScenarioStep> actions;

    static Result<Scenario> from_yaml(const std::string& yaml_text);
};

struct StepResult {
    size_t index;
    std::string action;
    std::string expected;
    std::string actual;
    std::string detail;
    bool pass;
};

struct ScenarioReport {
    std::string name;
    bool pass = true;
    std::vector<StepResult> steps;
    std::vector<std::string> audit;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] std::string to_text() const;
};

/// Executes against fresh in-process services. Reference errors (unknown
/// pod/token/sts refs, unknown actions) abort with ScenarioMalformed; step
/// outcome mismatches land in the report as failures.
Result<ScenarioReport> run_scenario(const Scenario& scenario);

std::vector<Scenario> builtin_scenarios();
Result<Scenario> find_builtin(const std::string& name);

}  // namespace fedauth::harness
