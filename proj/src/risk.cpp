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

#include "fedauth/risk.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace fedauth::risk {

using nlohmann::json;

RiskParameters RiskParameters::demo_defaults() {
    RiskParameters p;
    p.n_keys = 1000;
    p.t_long = kSecondsPerYear;
    p.i_blast = 10;  // illustrative weight, not measured
    p.n_auths = 1000;
    p.t_short = 3600;
    p.i_scoped = 1;  // illustrative weight, not measured
    p.n_idp = 3;
    return p;
}

Result<RiskParameters> RiskParameters::from_json(const json& doc) {
    if (!doc.is_object()) {
        return Error(Errc::ConfigInvalid, "risk parameters must be an object");
    }
    RiskParameters p = demo_defaults();
    auto read = [&](const char* name, double& out) -> Status {
        if (!doc.contains(name)) return {};
        if (!doc[name].is_number()) {
            return Error(Errc::ConfigInvalid,
                         std::string(name) + " must be a number");
        }
        out = doc[name].get<double>();
        if (out < 0 || !std::isfinite(out)) {
            return Error(Errc::ConfigInvalid,
                         std::string(name) + " must be finite and >= 0");
        }
        return {};
    };
    for (const auto& [name, field] :
         std::initializer_list<std::pair<const char*, double*>>{
             {"n_keys", &p.n_keys},
             {"t_long", &p.t_long},
             {"i_blast", &p.i_blast},
             {"n_auths", &p.n_auths},
             {"t_short", &p.t_short},
             {"i_scoped", &p.i_scoped},
             {"n_idp", &p.n_idp}}) {
        if (auto st = read(name, *field); !st.ok()) return st.error();
    }
    return p;
}

json RiskParameters::to_json() const {
    return json{{"n_keys", n_keys},   {"t_long", t_long},
                {"i_blast", i_blast}, {"n_auths", n_auths},
                {"t_short", t_short}, {"i_scoped", i_scoped},
                {"n_idp", n_idp}};
}

double risk_legacy(const RiskParameters& p) {
    return p.n_keys * p.t_long * p.i_blast;
}

double risk_wif(const RiskParameters& p) {
    return p.n_auths * p.t_short * p.i_scoped;
}

std::string lifetime_band(double seconds) {
    if (seconds <= 3600) return "minutes";
    if (seconds <= 48 * 3600) return "hours";
    if (seconds <= 60 * 86400) return "days";
    return "months to years";
}

namespace {

std::string humanize_seconds(double seconds) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(0);
    if (seconds >= kSecondsPerYear) {
        out << std::setprecision(1) << seconds / kSecondsPerYear << " y";
    } else if (seconds >= 86400) {
        out << seconds / 86400 << " d";
    } else if (seconds >= 2 * 3600) {
        out << seconds / 3600 << " h";
    } else if (seconds >= 60) {
        out << seconds / 60 << " min";
    } else {
        out << seconds << " s";
    }
    return out.str();
}

std::string format_count(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(0) << v;
    return out.str();
}

}  // namespace

ComparisonReport complexity_report(const RiskParameters& p) {
    ComparisonReport report;
    report.r_legacy = risk_legacy(p);
    report.r_wif = risk_wif(p);

    report.rows[0] = {
        "Credential Lifetime",
        "months to years (" + humanize_seconds(p.t_long) + ")",
        lifetime_band(p.t_short) + " (" + humanize_seconds(p.t_short) + ")",
        "token expiration (exp claim)",
    };
    report.rows[1] = {
        "Blast Radius",
        "high, broad permissions (index " + format_count(p.i_blast) + ")",
        "low, scoped (index " + format_count(p.i_scoped) + ")",
        "token audience scoping (aud claim)",
    };
    report.rows[2] = {
        "Static Secrets",
        format_count(p.n_keys),
        "0",
        "on-demand credential exchange",
    };
    report.rows[3] = {
        "Operational Complexity",
        "linear, O(N_keys), N_keys=" + format_count(p.n_keys),
        "near-constant, O(N_IdP), N_IdP=" + format_count(p.n_idp),
        "centralized trust policy",
    };
    report.footnote =
        "scores are relative units with proportionality constants fixed at 1; "
        "blast-radius and scoped-impact indices are user-supplied weights, "
        "not measured values";
    return report;
}

std::string ComparisonReport::to_text() const {
    std::ostringstream out;
    out << std::left;
    out << std::setw(24) << "Risk Factor" << std::setw(36) << "Legacy Model"
        << std::setw(34) << "Federated Model"
        << "Mechanism of Control\n";
    out << std::string(120, '-') << "\n";
    for (const auto& row : rows) {
        out << std::setw(24) << row.factor << std::setw(36) << row.legacy
            << std::setw(34) << row.federated << row.mechanism << "\n";
    }
    out << std::string(120, '-') << "\n";
    out << "R_legacy = " << r_legacy << " (relative units)\n";
    out << "R_wif    = " << r_wif << " (relative units)\n";
    if (r_wif > 0) {
        out << "ratio    = " << r_legacy / r_wif << "\n";
    }
    out << "note: " << footnote << "\n";
    return out.str();
}

json ComparisonReport::to_json() const {
    json rows_json = json::array();
    for (const auto& row : rows) {
        rows_json.push_back({{"factor", row.factor},
                             {"legacy", row.legacy},
                             {"federated", row.federated},
                             {"mechanism", row.mechanism}});
    }
    json doc{{"rows", rows_json},
             {"r_legacy", r_legacy},
             {"r_wif", r_wif},
             {"note", footnote}};
    if (r_wif > 0) doc["ratio"] = r_legacy / r_wif;
    return doc;
}

}  // namespace fedauth::risk
