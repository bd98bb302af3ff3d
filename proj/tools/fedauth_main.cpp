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

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedauth/condition.hpp"
#include "fedauth/http_servers.hpp"
#include "fedauth/idp.hpp"
#include "fedauth/risk.hpp"
#include "fedauth/scenario.hpp"
#include "fedauth/sigv4.hpp"
#include "fedauth/sts.hpp"
#include "fedauth/trust_config.hpp"
#include "fedauth/wire.hpp"
#include "fedauth/workload.hpp"

namespace {

using nlohmann::json;
using namespace fedauth;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

[[noreturn]] void serve_forever() {
    while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

int cmd_idp_serve(const std::string& issuer, const std::string& host, int port,
                  int64_t min_ttl, int64_t max_ttl, const std::string& alg) {
    idp::IdpConfig config;
    config.issuer = issuer;
    config.min_ttl = min_ttl;
    config.max_ttl = max_ttl;
    if (auto parsed = jwt::algorithm_from_name(alg)) {
        config.algorithm = *parsed;
    } else {
        std::cerr << "unknown algorithm: " << alg << "\n";
        return 2;
    }
    auto service = std::make_shared<idp::IdpService>(config, system_clock());
    auto server = http::make_idp_server(service);
    auto started = server->start(host, port);
    if (!started.ok()) {
        std::cerr << started.error().to_string() << "\n";
        return 1;
    }
    std::cout << "identity provider for " << issuer << " listening on http://"
              << host << ":" << started.value() << "\n";
    serve_forever();
}

int cmd_sts_serve(const std::string& host, int port, int64_t skew) {
    sts::StsConfig config;
    config.clock_skew = skew;
    auto service = std::make_shared<sts::StsService>(
        config, system_clock(), http::http_jwks_fetcher());
    auto server = http::make_sts_server(service);
    auto started = server->start(host, port);
    if (!started.ok()) {
        std::cerr << started.error().to_string() << "\n";
        return 1;
    }
    std::cout << "token service listening on http://" << host << ":"
              << started.value() << "\n";
    serve_forever();
}

int cmd_trust_apply(const std::string& file, const std::string& sts_url) {
    auto doc = config::parse_trust_document(read_file(file));
    if (!doc.ok()) {
        std::cerr << doc.error().to_string() << "\n";
        return 2;
    }

    struct Poster {
        const std::string& sts_url;

        int operator()(const sts::TrustPolicy& policy) const {
            json body{{"Role", policy.role_name},
                      {"Scopes", policy.scopes},
                      {"Version", "2012-10-17"}};
            json condition = json::object();
            for (const auto& [k, v] : policy.condition.required) {
                condition[k] = v;
            }
            body["Statement"] = json::array({json{
                {"Effect", "Allow"},
                {"Principal", {{"Federated", policy.federated_principal}}},
                {"Action", sts::TrustPolicy::kAction},
                {"Condition", {{"StringEquals", condition}}}}});
            return post("/admin/trust-policy", body, "trust policy applied");
        }
        int operator()(const sts::WorkloadIdentityPool& pool) const {
            json providers = json::array();
            for (const auto& p : pool.providers) {
                json entry{{"provider_id", p.provider_id},
                           {"attribute_condition", p.condition_source},
                           {"service_account", p.service_account},
                           {"scopes", p.scopes}};
                if (!p.issuer.empty()) entry["issuer"] = p.issuer;
                if (!p.aws_account_id.empty()) {
                    entry["aws"] = {{"account_id", p.aws_account_id}};
                }
                json mapping = json::object();
                for (const auto& m : p.attribute_mapping.entries) {
                    mapping[m.target] = cond::print_expr(m.value);
                }
                entry["attribute_mapping"] = mapping;
                providers.push_back(entry);
            }
            json body{{"pool_id", pool.pool_id}, {"providers", providers}};
            return post("/admin/pool", body, "pool applied");
        }
        int operator()(const sts::OidcProviderRegistration& reg) const {
            json body{{"kind", "oidc-provider"},
                      {"provider_id", reg.provider_id},
                      {"issuer", reg.issuer},
                      {"audiences", reg.audiences},
                      {"jwks_cache_ttl", reg.jwks_cache_ttl}};
            if (!reg.jwks_uri.empty()) body["jwks_uri"] = reg.jwks_uri;
            if (reg.inline_jwks) body["jwks"] = reg.inline_jwks->to_json();
            return post("/admin/provider", body, "provider registered");
        }

        int post(const std::string& path, const json& body,
                 const std::string& ok_message) const {
            auto result = http::http_post_json(sts_url, path, body);
            if (!result.ok()) {
                std::cerr << result.error().to_string() << "\n";
                return 1;
            }
            std::cout << ok_message << ": " << result.value().dump() << "\n";
            return 0;
        }
    };
    return std::visit(Poster{sts_url}, doc.value());
}

int cmd_trust_revoke(const std::string& provider_id, const std::string& sts_url) {
    auto result = http::http_delete(sts_url, "/admin/provider/" + provider_id);
    if (!result.ok()) {
        std::cerr << result.error().to_string() << "\n";
        return 1;
    }
    std::cout << "provider revoked: " << provider_id << "\n";
    return 0;
}

int cmd_workload_run(const std::string& config_file, const std::string& resource,
                     int loop) {
    auto cfg = client::WorkloadConfig::from_yaml(read_file(config_file));
    if (!cfg.ok()) {
        std::cerr << cfg.error().to_string() << "\n";
        return 2;
    }
    auto config = std::move(cfg).value();
    if (config.pod.pod_uid.empty()) {
        // register the pod on the fly; the uid is the pod's identity handle
        auto registered = http::http_post_json(
            config.idp_endpoint, "/admin/register-pod",
            json{{"namespace", config.pod.ns},
                 {"serviceaccount", config.pod.serviceaccount},
                 {"pod_name", config.pod.serviceaccount + "-0"}});
        if (!registered.ok()) {
            std::cerr << "pod registration failed: "
                      << registered.error().to_string() << "\n";
            return 1;
        }
        config.pod.pod_uid = registered.value().value("pod_uid", "");
        std::cout << "registered pod uid " << config.pod.pod_uid << "\n";
    }

    client::WorkloadClient workload(
        config, http::make_http_idp_channel(config.idp_endpoint),
        http::make_http_sts_channel(config.target.sts_endpoint),
        system_clock());

    bool all_allowed = true;
    for (int i = 0; i < loop; ++i) {
        auto decision = workload.access_resource(resource);
        if (!decision.ok()) {
            std::cerr << decision.error().to_string() << "\n";
            return 1;
        }
        std::cout << "access " << resource << ": "
                  << (decision.value() ? "allow" : "deny") << "\n";
        all_allowed = all_allowed && decision.value();
    }
    return all_allowed ? 0 : 1;
}

int cmd_legacy_sign(const std::string& key_id, const std::string& secret,
                    const std::string& date, const std::string& region,
                    const std::string& service, const std::string& method,
                    const std::string& path, const std::string& host,
                    const std::string& payload) {
    legacy::StaticKey key{key_id, secret, 0, {}};
    legacy::HttpRequest request;
    request.method = method;
    request.path = path;
    request.headers = {{"host", host}, {"x-amz-date", date + "T000000Z"}};
    request.payload = payload;
    auto header = legacy::sign(request, key, date, region, service);
    if (!header.ok()) {
        std::cerr << header.error().to_string() << "\n";
        return 2;
    }
    std::cout << "Authorization: " << header.value() << "\n";
    return 0;
}

int cmd_risk_report(const std::string& params_file, bool as_json) {
    risk::RiskParameters params = risk::RiskParameters::demo_defaults();
    if (!params_file.empty()) {
        json doc = json::parse(read_file(params_file), nullptr, false);
        if (doc.is_discarded()) {
            std::cerr << "params file is not valid JSON\n";
            return 2;
        }
        auto parsed = risk::RiskParameters::from_json(doc);
        if (!parsed.ok()) {
            std::cerr << parsed.error().to_string() << "\n";
            return 2;
        }
        params = parsed.value();
    }
    auto report = risk::complexity_report(params);
    if (as_json) {
        std::cout << report.to_json().dump(2) << "\n";
    } else {
        std::cout << report.to_text();
    }
    return 0;
}

int cmd_condition_eval(const std::string& expr,
                       const std::vector<std::string>& attrs) {
    auto parsed = cond::parse_condition(expr);
    if (!parsed.ok()) {
        std::cerr << parsed.error().to_string() << "\n";
        return 2;
    }
    cond::AssertionContext ctx;
    for (const auto& kv : attrs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "attributes take the form key=value: " << kv << "\n";
            return 2;
        }
        ctx.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    auto verdict = cond::eval_condition(parsed.value(), ctx);
    if (!verdict.ok()) {
        std::cerr << verdict.error().to_string() << "\n";
        return 2;
    }
    std::cout << (verdict.value() ? "true" : "false") << "\n";
    return verdict.value() ? 0 : 1;
}

int cmd_scenario_list() {
    for (const auto& scenario : harness::builtin_scenarios()) {
        std::cout << scenario.name << "\n";
    }
    return 0;
}

int cmd_scenario_run(const std::string& name, bool run_all, bool as_json,
                     const std::string& file) {
    std::vector<harness::Scenario> selected;
    if (!file.empty()) {
        auto scenario = harness::Scenario::from_yaml(read_file(file));
        if (!scenario.ok()) {
            std::cerr << scenario.error().to_string() << "\n";
            return 2;
        }
        selected.push_back(std::move(scenario).value());
    } else if (run_all) {
        selected = harness::builtin_scenarios();
    } else {
        auto scenario = harness::find_builtin(name);
        if (!scenario.ok()) {
            std::cerr << scenario.error().to_string() << "\n";
            return 2;
        }
        selected.push_back(std::move(scenario).value());
    }

    bool all_pass = true;
    json reports = json::array();
    for (const auto& scenario : selected) {
        auto report = harness::run_scenario(scenario);
        if (!report.ok()) {
            std::cerr << scenario.name << ": " << report.error().to_string()
                      << "\n";
            return 2;
        }
        all_pass = all_pass && report.value().pass;
        if (as_json) {
            reports.push_back(report.value().to_json());
        } else {
            std::cout << report.value().to_text();
        }
    }
    if (as_json) std::cout << reports.dump(2) << "\n";
    return all_pass ? 0 : 1;
}

int cmd_resource_serve(const std::string& host, int port,
                       const std::string& sts_url) {
    auto check = [sts_url](const sts::CredentialPresentation& presentation,
                           const std::string& resource) {
        auto result = http::http_post_json(
            sts_url, "/v1/resource/check",
            json{{"credential_id", presentation.credential_id},
                 {"secret", presentation.secret},
                 {"session_token", presentation.session_token},
                 {"resource", resource}});
        return result.ok() && result.value().value("allow", false);
    };
    auto server = http::make_resource_server(check);
    auto started = server->start(host, port);
    if (!started.ok()) {
        std::cerr << started.error().to_string() << "\n";
        return 1;
    }
    std::cout << "mock resource listening on http://" << host << ":"
              << started.value() << " (checks against " << sts_url << ")\n";
    serve_forever();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedauth: workload identity federation testbed"};
    app.require_subcommand(1);

    // idp serve
    auto* idp_cmd = app.add_subcommand("idp", "identity provider");
    auto* idp_serve = idp_cmd->add_subcommand("serve", "serve the IdP over HTTP");
    std::string issuer = "https://idp.local";
    std::string host = "127.0.0.1";
    int port = 8801;
    int64_t min_ttl = 600;
    int64_t max_ttl = 86'400;
    std::string alg = "ES256";
    idp_serve->add_option("--issuer", issuer);
    idp_serve->add_option("--host", host);
    idp_serve->add_option("--port", port);
    idp_serve->add_option("--min-ttl", min_ttl);
    idp_serve->add_option("--max-ttl", max_ttl);
    idp_serve->add_option("--alg", alg, "RS256 or ES256");

    // sts serve
    auto* sts_cmd = app.add_subcommand("sts", "security token service");
    auto* sts_serve = sts_cmd->add_subcommand("serve", "serve the STS over HTTP");
    std::string sts_host = "127.0.0.1";
    int sts_port = 8802;
    int64_t skew = jwt::kDefaultClockSkew;
    sts_serve->add_option("--host", sts_host);
    sts_serve->add_option("--port", sts_port);
    sts_serve->add_option("--skew", skew);

    // trust apply / revoke
    auto* trust = app.add_subcommand("trust", "trust configuration");
    auto* trust_apply = trust->add_subcommand("apply", "apply a config document");
    std::string trust_file;
    std::string trust_sts = "http://127.0.0.1:8802";
    trust_apply->add_option("-f,--file", trust_file)->required();
    trust_apply->add_option("--sts", trust_sts);
    auto* trust_revoke = trust->add_subcommand("revoke", "revoke a provider");
    std::string revoke_id;
    trust_revoke->add_option("provider_id", revoke_id)->required();
    trust_revoke->add_option("--sts", trust_sts);

    // workload run
    auto* workload_cmd = app.add_subcommand("workload", "workload client");
    auto* workload_run = workload_cmd->add_subcommand("run", "run the exchange");
    std::string workload_config;
    std::string workload_resource;
    int loop = 1;
    workload_run->add_option("--config", workload_config)->required();
    workload_run->add_option("--resource", workload_resource)->required();
    workload_run->add_option("--loop", loop);

    // legacy sign
    auto* legacy_cmd = app.add_subcommand("legacy", "static-key baseline");
    auto* legacy_sign = legacy_cmd->add_subcommand("sign", "emit an authorization header");
    std::string key_id;
    std::string secret;
    std::string date = "20250727";
    std::string region = "us-east-1";
    std::string service = "s3";
    std::string method = "GET";
    std::string path = "/";
    std::string host_header = "example.amazonaws.com";
    std::string payload;
    legacy_sign->add_option("--key-id", key_id)->required();
    legacy_sign->add_option("--secret", secret)->required();
    legacy_sign->add_option("--date", date);
    legacy_sign->add_option("--region", region);
    legacy_sign->add_option("--service", service);
    legacy_sign->add_option("--method", method);
    legacy_sign->add_option("--path", path);
    legacy_sign->add_option("--host-header", host_header);
    legacy_sign->add_option("--payload", payload);

    // risk report
    auto* risk_cmd = app.add_subcommand("risk", "risk model");
    auto* risk_report = risk_cmd->add_subcommand("report", "comparison report");
    std::string params_file;
    bool risk_json = false;
    risk_report->add_option("--params", params_file);
    risk_report->add_flag("--json", risk_json);

    // condition eval
    auto* condition_cmd = app.add_subcommand("condition", "condition language");
    auto* condition_eval = condition_cmd->add_subcommand("eval", "evaluate an expression");
    std::string expr;
    std::vector<std::string> attrs;
    condition_eval->add_option("--expr", expr)->required();
    condition_eval->add_option("--attr", attrs, "attribute as key=value");

    // scenario list / run
    auto* scenario_cmd = app.add_subcommand("scenario", "scenario harness");
    auto* scenario_list = scenario_cmd->add_subcommand("list", "list built-ins");
    auto* scenario_run = scenario_cmd->add_subcommand("run", "run scenarios");
    std::string scenario_name;
    bool scenario_all = false;
    bool scenario_json = false;
    std::string scenario_file;
    scenario_run->add_option("name", scenario_name);
    scenario_run->add_flag("--all", scenario_all);
    scenario_run->add_flag("--json", scenario_json);
    scenario_run->add_option("--file", scenario_file);

    // resource serve
    auto* resource_cmd = app.add_subcommand("resource", "mock protected resource");
    auto* resource_serve = resource_cmd->add_subcommand("serve", "serve it");
    std::string resource_host = "127.0.0.1";
    int resource_port = 8803;
    std::string resource_sts = "http://127.0.0.1:8802";
    resource_serve->add_option("--host", resource_host);
    resource_serve->add_option("--port", resource_port);
    resource_serve->add_option("--sts", resource_sts);

    CLI11_PARSE(app, argc, argv);

    if (idp_serve->parsed()) {
        return cmd_idp_serve(issuer, host, port, min_ttl, max_ttl, alg);
    }
    if (sts_serve->parsed()) return cmd_sts_serve(sts_host, sts_port, skew);
    if (trust_apply->parsed()) return cmd_trust_apply(trust_file, trust_sts);
    if (trust_revoke->parsed()) return cmd_trust_revoke(revoke_id, trust_sts);
    if (workload_run->parsed()) {
        return cmd_workload_run(workload_config, workload_resource, loop);
    }
    if (legacy_sign->parsed()) {
        return cmd_legacy_sign(key_id, secret, date, region, service, method,
                               path, host_header, payload);
    }
    if (risk_report->parsed()) return cmd_risk_report(params_file, risk_json);
    if (condition_eval->parsed()) return cmd_condition_eval(expr, attrs);
    if (scenario_list->parsed()) return cmd_scenario_list();
    if (scenario_run->parsed()) {
        if (!scenario_all && scenario_name.empty() && scenario_file.empty()) {
            std::cerr << "scenario run needs a name, --all, or --file\n";
            return 2;
        }
        return cmd_scenario_run(scenario_name, scenario_all, scenario_json,
                                scenario_file);
    }
    if (resource_serve->parsed()) {
        return cmd_resource_serve(resource_host, resource_port, resource_sts);
    }
    std::cerr << app.help();
    return 2;
}
