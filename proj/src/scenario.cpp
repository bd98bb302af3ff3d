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

#include "fedauth/scenario.hpp"

#include <map>
#include <memory>
#include <sstream>

#include "fedauth/clock.hpp"
#include "fedauth/idp.hpp"
#include "fedauth/jwt.hpp"
#include "fedauth/sigv4.hpp"
#include "fedauth/sts.hpp"
#include "fedauth/trust_config.hpp"

namespace fedauth::harness {

using nlohmann::json;

namespace {

// Fixed scenario epoch; all scenario timestamps derive from it.
constexpr int64_t kScenarioEpoch = 1'754'006'400;

std::string kind_name(ExpectedOutcome::Kind kind) {
    switch (kind) {
        case ExpectedOutcome::Kind::Ok: return "ok";
        case ExpectedOutcome::Kind::Allow: return "allow";
        case ExpectedOutcome::Kind::Deny: return "deny";
        case ExpectedOutcome::Kind::Accept: return "accept";
        case ExpectedOutcome::Kind::Reject: return "reject";
        case ExpectedOutcome::Kind::Error: return "error";
    }
    return "?";
}

}  // namespace

Result<ExpectedOutcome> ExpectedOutcome::parse(const std::string& text) {
    ExpectedOutcome out;
    if (text == "ok") {
        out.kind = Kind::Ok;
    } else if (text == "allow") {
        out.kind = Kind::Allow;
    } else if (text == "deny") {
        out.kind = Kind::Deny;
    } else if (text == "accept") {
        out.kind = Kind::Accept;
    } else if (text == "reject") {
        out.kind = Kind::Reject;
    } else if (text.rfind("error:", 0) == 0) {
        out.kind = Kind::Error;
        std::string rest = text.substr(6);
        auto slash = rest.find('/');
        std::string code = rest.substr(0, slash);
        auto parsed = errc_from_name(code);
        if (!parsed) {
            return Error(Errc::ScenarioMalformed,
                         "unknown error code in expectation: " + code);
        }
        out.code = *parsed;
        if (slash != std::string::npos) {
            auto cause = errc_from_name(rest.substr(slash + 1));
            if (!cause) {
                return Error(Errc::ScenarioMalformed,
                             "unknown cause in expectation: " + rest);
            }
            out.cause = *cause;
        }
    } else {
        return Error(Errc::ScenarioMalformed, "unknown expectation: " + text);
    }
    return out;
}

std::string ExpectedOutcome::to_string() const {
    std::string out = kind_name(kind);
    if (kind == Kind::Error && code) {
        out += ":";
        out += errc_name(*code);
        if (cause) {
            out += "/";
            out += errc_name(*cause);
        }
    }
    return out;
}

std::string Outcome::to_string() const {
    std::string out = kind_name(kind);
    if (kind == ExpectedOutcome::Kind::Error && code) {
        out += ":";
        out += errc_name(*code);
        if (cause) {
            out += "/";
            out += errc_name(*cause);
        }
    }
    return out;
}

bool outcome_matches(const ExpectedOutcome& expected, const Outcome& actual) {
    if (expected.kind != actual.kind) return false;
    if (expected.kind != ExpectedOutcome::Kind::Error) return true;
    if (expected.code && actual.code != expected.code) return false;
    if (expected.cause && actual.cause != expected.cause) return false;
    return true;
}

Result<Scenario> Scenario::from_yaml(const std::string& yaml_text) {
    auto converted = config::yaml_to_json(yaml_text);
    if (!converted.ok()) return converted.error();
    const json& doc = converted.value();
    if (!doc.is_object()) {
        return Error(Errc::ScenarioMalformed, "scenario must be a map");
    }
    Scenario scenario;
    scenario.name = doc.value("name", "");
    if (scenario.name.empty()) {
        return Error(Errc::ScenarioMalformed, "scenario needs a name");
    }
    scenario.description = doc.value("description", "");
    if (doc.contains("seed")) scenario.seed = doc["seed"].get<uint64_t>();
    scenario.setup = doc.value("setup", json::object());
    if (!doc.contains("actions") || !doc["actions"].is_array() ||
        doc["actions"].empty()) {
        return Error(Errc::ScenarioMalformed, "scenario needs actions");
    }
    for (const auto& entry : doc["actions"]) {
        if (!entry.is_object() || !entry.contains("do")) {
            return Error(Errc::ScenarioMalformed,
                         "every action needs a 'do' field");
        }
        ScenarioStep step;
        step.action = entry["do"].get<std::string>();
        step.args = entry;
        // expected outcomes must cover every action step
        if (!entry.contains("expect") || !entry["expect"].is_string()) {
            return Error(Errc::ScenarioMalformed,
                         "action '" + step.action + "' has no expectation");
        }
        auto expect = ExpectedOutcome::parse(entry["expect"].get<std::string>());
        if (!expect.ok()) return expect.error();
        step.expect = expect.value();
        scenario.actions.push_back(std::move(step));
    }
    return scenario;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

struct SignedRequest {
    legacy::HttpRequest request;
    std::string authorization;
};

struct Env {
    std::shared_ptr<FakeClock> clock;
    IdGenerator idgen;

    std::map<std::string, std::shared_ptr<idp::IdpService>> idps;
    struct AssertionIssuer {
        std::string issuer;
        std::shared_ptr<jwt::Keystore> keystore;
    };
    std::map<std::string, AssertionIssuer> assertion_issuers;
    std::map<std::string, std::shared_ptr<sts::StsService>> stss;
    std::string default_sts;

    struct PodRef {
        std::string idp_ref;
        std::string pod_uid;
    };
    std::map<std::string, PodRef> pods;

    legacy::LegacyKeystore legacy_keys;
    std::map<std::string, SignedRequest> signatures;

    std::map<std::string, jwt::SignedJwt> tokens;
    std::map<std::string, sts::NativeCredential> credentials;
    std::map<std::string, sts::FederatedToken> federated;

    // Resolves logical issuer URIs to the owning service's JWKS.
    Result<jwt::JwkSet> fetch_jwks(const std::string& uri) const {
        for (const auto& [ref, service] : idps) {
            if (service->issuer() == uri) return service->jwks();
        }
        for (const auto& [ref, ai] : assertion_issuers) {
            if (ai.issuer == uri) return ai.keystore->jwks();
        }
        return Error(Errc::JwksUnreachable, "no issuer serves " + uri);
    }
};

Error malformed(const std::string& what) {
    return Error(Errc::ScenarioMalformed, what);
}

Result<std::shared_ptr<sts::StsService>> resolve_sts(Env& env, const json& args) {
    std::string ref = args.value("sts", env.default_sts);
    auto it = env.stss.find(ref);
    if (it == env.stss.end()) return malformed("unknown sts ref: " + ref);
    return it->second;
}

Status build_env(Env& env, const Scenario& scenario) {
    env.clock = std::make_shared<FakeClock>(kScenarioEpoch);
    env.idgen = seeded_id_generator(scenario.seed);
    const json& setup = scenario.setup;

    json sts_list = setup.value("stss", json::array({json{{"ref", "sts"}}}));
    for (const auto& entry : sts_list) {
        std::string ref = entry.value("ref", "sts");
        sts::StsConfig config;
        Env* env_ptr = &env;
        auto service = std::make_shared<sts::StsService>(
            config, env.clock,
            [env_ptr](const std::string& uri) { return env_ptr->fetch_jwks(uri); },
            env.idgen);
        env.stss[ref] = std::move(service);
        if (env.default_sts.empty()) env.default_sts = ref;
    }

    for (const auto& entry : setup.value("idps", json::array())) {
        std::string ref = entry.value("ref", "");
        if (ref.empty()) return malformed("idp entry needs a ref");
        idp::IdpConfig config;
        config.issuer = entry.value("issuer", "https://idp.local");
        if (entry.contains("algorithm")) {
            auto alg = jwt::algorithm_from_name(
                entry["algorithm"].get<std::string>());
            if (!alg) return malformed("unknown algorithm in idp " + ref);
            config.algorithm = *alg;
        }
        env.idps[ref] =
            std::make_shared<idp::IdpService>(config, env.clock, env.idgen);
    }

    for (const auto& entry : setup.value("assertion_issuers", json::array())) {
        std::string ref = entry.value("ref", "");
        if (ref.empty()) return malformed("assertion issuer needs a ref");
        Env::AssertionIssuer issuer;
        issuer.issuer = entry.value("issuer", "");
        issuer.keystore = std::make_shared<jwt::Keystore>(
            jwt::Algorithm::ES256, env.clock, 2 * 86'400, env.idgen);
        env.assertion_issuers[ref] = std::move(issuer);
    }

    for (const auto& entry : setup.value("pods", json::array())) {
        std::string ref = entry.value("ref", "");
        std::string idp_ref = entry.value("idp", "");
        auto it = env.idps.find(idp_ref);
        if (ref.empty() || it == env.idps.end()) {
            return malformed("pod entry needs ref and a known idp");
        }
        auto pod = it->second->register_pod(
            {entry.value("namespace", ""), entry.value("serviceaccount", "")},
            entry.value("pod_name", ""));
        if (!pod.ok()) return pod.error();
        env.pods[ref] = {idp_ref, pod.value().pod_uid};
    }

    for (const auto& entry : setup.value("providers", json::array())) {
        auto service = resolve_sts(env, entry);
        if (!service.ok()) return service.error();
        sts::OidcProviderRegistration reg;
        reg.provider_id = entry.value("id", "");
        if (entry.contains("idp")) {
            auto it = env.idps.find(entry["idp"].get<std::string>());
            if (it == env.idps.end()) {
                return malformed("provider references unknown idp");
            }
            reg.issuer = it->second->issuer();
        } else if (entry.contains("issuer_ref")) {
            auto it =
                env.assertion_issuers.find(entry["issuer_ref"].get<std::string>());
            if (it == env.assertion_issuers.end()) {
                return malformed("provider references unknown assertion issuer");
            }
            reg.issuer = it->second.issuer;
        } else {
            reg.issuer = entry.value("issuer", "");
        }
        reg.jwks_uri = reg.issuer;  // logical; resolved by the env fetcher
        for (const auto& aud : entry.value("audiences", json::array())) {
            reg.audiences.push_back(aud.get<std::string>());
        }
        auto registered = service.value()->register_provider(std::move(reg));
        if (!registered.ok()) return registered.error();
    }

    for (const auto& entry : setup.value("trust_policies", json::array())) {
        auto service = resolve_sts(env, entry);
        if (!service.ok()) return service.error();
        sts::TrustPolicy policy;
        policy.role_name = entry.value("role", "");
        policy.federated_principal = entry.value("provider", "");
        for (const auto& scope : entry.value("scopes", json::array())) {
            policy.scopes.push_back(scope.get<std::string>());
        }
        const json condition = entry.value("condition", json::object());
        for (const auto& [key, value] : condition.items()) {
            policy.condition.required[key] = value.get<std::string>();
        }
        auto applied = service.value()->apply_trust_policy(std::move(policy));
        if (!applied.ok()) return applied.error();
    }

    for (const auto& entry : setup.value("pools", json::array())) {
        auto service = resolve_sts(env, entry);
        if (!service.ok()) return service.error();
        auto pool = config::parse_pool(entry, entry.value("id", ""));
        if (!pool.ok()) return pool.error();
        auto applied = service.value()->apply_pool(std::move(pool).value());
        if (!applied.ok()) return applied.error();
    }

    for (const auto& entry : setup.value("static_keys", json::array())) {
        legacy::StaticKey key;
        key.access_key_id = entry.value("id", "");
        key.secret_key = entry.value("secret", "");
        key.created_at = env.clock->now();
        for (const auto& p : entry.value("permissions", json::array())) {
            key.permissions.push_back(p.get<std::string>());
        }
        env.legacy_keys.add(std::move(key));
    }
    return {};
}

template <typename T>
Outcome outcome_of(const Result<T>& result) {
    if (result.ok()) return {ExpectedOutcome::Kind::Ok, {}, {}, ""};
    const Error& err = result.error();
    return {ExpectedOutcome::Kind::Error, err.code, err.cause, err.message};
}

legacy::HttpRequest sample_request(const std::string& date) {
    legacy::HttpRequest request;
    request.method = "GET";
    request.path = "/";
    request.headers = {{"host", "example.amazonaws.com"},
                       {"x-amz-date", date + "T000000Z"}};
    return request;
}

Result<Outcome> execute_step(Env& env, const ScenarioStep& step) {
    const json& args = step.args;
    const std::string& action = step.action;

    auto save_as = [&](const std::string& field) {
        return args.value(field, std::string{});
    };

    if (action == "advance_clock") {
        env.clock->advance(args.value("seconds", int64_t{0}));
        return Outcome{ExpectedOutcome::Kind::Ok, {}, {}, ""};
    }

    if (action == "token") {
        auto pod_it = env.pods.find(args.value("pod", ""));
        if (pod_it == env.pods.end()) return malformed("unknown pod ref");
        auto& idp_service = env.idps.at(pod_it->second.idp_ref);
        idp::TokenRequestSpec spec{args.value("audience", ""),
                                   args.value("ttl", int64_t{3600})};
        auto issued =
            idp_service->issue_bound_token(pod_it->second.pod_uid, spec);
        if (issued.ok() && !save_as("save").empty()) {
            env.tokens[save_as("save")] = issued.value().token;
        }
        return outcome_of(issued);
    }

    if (action == "assertion") {
        auto it = env.assertion_issuers.find(args.value("issuer", ""));
        if (it == env.assertion_issuers.end()) {
            return malformed("unknown assertion issuer ref");
        }
        jwt::JwtClaims claims;
        claims.issuer = it->second.issuer;
        claims.subject = args.value("subject", "assertion");
        claims.audience = {args.value("audience", "")};
        claims.issued_at = env.clock->now();
        claims.expires_at = claims.issued_at + args.value("ttl", int64_t{3600});
        claims.jwt_id = env.idgen();
        const json extra_claims = args.value("claims", json::object());
        for (const auto& [k, v] : extra_claims.items()) {
            claims.extra[k] = v;
        }
        auto token = it->second.keystore->mint(claims);
        if (token.ok() && !save_as("save").empty()) {
            env.tokens[save_as("save")] = token.value();
        }
        return outcome_of(token);
    }

    if (action == "deregister_pod") {
        auto pod_it = env.pods.find(args.value("pod", ""));
        if (pod_it == env.pods.end()) return malformed("unknown pod ref");
        auto& idp_service = env.idps.at(pod_it->second.idp_ref);
        return outcome_of(
            Result<void>(idp_service->deregister_pod(pod_it->second.pod_uid)));
    }

    if (action == "assume_role") {
        auto service = resolve_sts(env, args);
        if (!service.ok()) return service.error();
        auto token_it = env.tokens.find(args.value("token", ""));
        if (token_it == env.tokens.end()) return malformed("unknown token ref");
        auto cred = service.value()->assume_role_with_web_identity(
            token_it->second, args.value("role", ""));
        if (cred.ok() && !save_as("save").empty()) {
            env.credentials[save_as("save")] = cred.value();
        }
        return outcome_of(cred);
    }

    if (action == "exchange") {
        auto service = resolve_sts(env, args);
        if (!service.ok()) return service.error();
        auto token_it = env.tokens.find(args.value("token", ""));
        if (token_it == env.tokens.end()) return malformed("unknown token ref");
        auto fed = service.value()->exchange_federated_token(
            token_it->second, args.value("pool", ""),
            args.value("provider", ""));
        if (fed.ok() && !save_as("save").empty()) {
            env.federated[save_as("save")] = fed.value();
        }
        return outcome_of(fed);
    }

    if (action == "impersonate") {
        auto service = resolve_sts(env, args);
        if (!service.ok()) return service.error();
        auto fed_it = env.federated.find(args.value("federated", ""));
        if (fed_it == env.federated.end()) {
            return malformed("unknown federated token ref");
        }
        auto cred = service.value()->impersonate_service_account(
            fed_it->second.value, args.value("account", ""));
        if (cred.ok() && !save_as("save").empty()) {
            env.credentials[save_as("save")] = cred.value();
        }
        return outcome_of(cred);
    }

    if (action == "check_access") {
        auto service = resolve_sts(env, args);
        if (!service.ok()) return service.error();
        auto cred_it = env.credentials.find(args.value("credential", ""));
        if (cred_it == env.credentials.end()) {
            return malformed("unknown credential ref");
        }
        const auto& cred = cred_it->second;
        bool allow = service.value()->check_access(
            {cred.credential_id, cred.secret, cred.session_token},
            args.value("resource", ""));
        return Outcome{allow ? ExpectedOutcome::Kind::Allow
                             : ExpectedOutcome::Kind::Deny,
                       {},
                       {},
                       ""};
    }

    if (action == "revoke_provider") {
        auto service = resolve_sts(env, args);
        if (!service.ok()) return service.error();
        return outcome_of(Result<void>(
            service.value()->revoke_provider(args.value("provider", ""))));
    }

    if (action == "legacy_sign") {
        std::string date = args.value("date", "20250727");
        auto request = sample_request(date);
        auto header = env.legacy_keys.sign_with(
            args.value("key", ""), request, date,
            args.value("region", "us-east-1"), args.value("service", "s3"));
        if (header.ok() && !save_as("save").empty()) {
            env.signatures[save_as("save")] = {request, header.value()};
        }
        return outcome_of(header);
    }

    if (action == "legacy_verify") {
        auto sig_it = env.signatures.find(args.value("signature", ""));
        if (sig_it == env.signatures.end()) {
            return malformed("unknown signature ref");
        }
        std::string authorization = sig_it->second.authorization;
        if (args.value("tamper", false)) {
            // flip the last signature nibble
            char& last = authorization.back();
            last = last == '0' ? '1' : '0';
        }
        auto decision = legacy::verify(sig_it->second.request, authorization,
                                       env.legacy_keys, env.clock->now());
        return Outcome{decision.accepted ? ExpectedOutcome::Kind::Accept
                                         : ExpectedOutcome::Kind::Reject,
                       {},
                       {},
                       decision.reason};
    }

    return malformed("unknown action: " + action);
}

}  // namespace

Result<ScenarioReport> run_scenario(const Scenario& scenario) {
    Env env;
    if (auto st = build_env(env, scenario); !st.ok()) {
        if (st.error().code == Errc::ScenarioMalformed) return st.error();
        return Error(Errc::ScenarioMalformed,
                     "setup failed: " + st.error().to_string());
    }

    ScenarioReport report;
    report.name = scenario.name;
    for (size_t i = 0; i < scenario.actions.size(); ++i) {
        const ScenarioStep& step = scenario.actions[i];
        auto outcome = execute_step(env, step);
        if (!outcome.ok()) return outcome.error();

        StepResult result;
        result.index = i;
        result.action = step.action;
        result.expected = step.expect.to_string();
        result.actual = outcome.value().to_string();
        result.detail = outcome.value().detail;
        result.pass = outcome_matches(step.expect, outcome.value());
        report.pass = report.pass && result.pass;
        report.steps.push_back(std::move(result));
    }

    for (const auto& [ref, service] : env.idps) {
        for (const auto& entry : service->audit_log()) {
            std::ostringstream line;
            line << "idp[" << ref << "] issue jwt_id=" << entry.jwt_id
                 << " pod=" << entry.pod_uid << " aud=" << entry.audience
                 << " iat=" << entry.issued_at << " exp=" << entry.expires_at;
            report.audit.push_back(line.str());
        }
    }
    for (const auto& [ref, service] : env.stss) {
        for (const auto& entry : service->audit_log()) {
            std::ostringstream line;
            line << "sts[" << ref << "] " << entry.kind << " "
                 << (entry.success ? "ok" : "denied");
            if (!entry.jwt_id.empty()) line << " jwt_id=" << entry.jwt_id;
            line << " at=" << entry.at << " " << entry.detail;
            report.audit.push_back(line.str());
        }
    }
    return report;
}

json ScenarioReport::to_json() const {
    json steps_json = json::array();
    for (const auto& s : steps) {
        steps_json.push_back({{"index", s.index},
                              {"action", s.action},
                              {"expected", s.expected},
                              {"actual", s.actual},
                              {"detail", s.detail},
                              {"pass", s.pass}});
    }
    return json{{"name", name},
                {"pass", pass},
                {"steps", steps_json},
                {"audit", audit}};
}

std::string ScenarioReport::to_text() const {
    std::ostringstream out;
    out << (pass ? "PASS" : "FAIL") << "  " << name << "\n";
    for (const auto& s : steps) {
        out << "  [" << (s.pass ? "ok" : "MISMATCH") << "] step " << s.index
            << " " << s.action << ": expected " << s.expected << ", got "
            << s.actual;
        if (!s.pass && !s.detail.empty()) out << " (" << s.detail << ")";
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Built-in scenarios

namespace {

const char* const kBuiltinYaml[] = {
    // 1. source-cluster pod assumes a role in the target cloud (Fig. 2 shape)
    R"yaml(
name: happy-path-gcp-to-aws
description: >
  A pod in the source cluster obtains an audience-bound token and assumes a
  role at the target token service, then reads the protected resource.
seed: 101
setup:
  idps:
    - {ref: gke, issuer: "https://idp.gcp.local"}
  pods:
    - {ref: pegasus0, idp: gke, namespace: pegasus, serviceaccount: pegasus-sa, pod_name: pegasus-0}
  providers:
    - {id: gke-pegasus-provider, idp: gke, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: pegasus-iam-role
      provider: gke-pegasus-provider
      scopes: [s3-pegasus-data]
      condition:
        "idp.gcp.local:sub": "system:serviceaccount:pegasus:pegasus-sa"
        "idp.gcp.local:aud": "sts.amazonaws.com"
actions:
  - {do: token, pod: pegasus0, audience: sts.amazonaws.com, ttl: 3600, save: tok, expect: ok}
  - {do: assume_role, token: tok, role: pegasus-iam-role, save: cred, expect: ok}
  - {do: check_access, credential: cred, resource: s3-pegasus-data, expect: allow}
  - {do: check_access, credential: cred, resource: unrelated-bucket, expect: deny}
)yaml",

    // 2. pool exchange plus impersonation (Fig. 3 shape)
    R"yaml(
name: happy-path-aws-to-gcp
description: >
  An assumed-role identity assertion is exchanged at the pool provider,
  mapped to google.subject, and traded for a credential of the linked
  service account.
seed: 102
setup:
  assertion_issuers:
    - {ref: awssts, issuer: "https://sts.aws.local"}
  providers:
    - {id: aws-assertions, issuer_ref: awssts, audiences: ["https://iam.googleapis.com/pegasus-pool"]}
  pools:
    - id: pegasus-pool
      providers:
        - provider_id: eks-pegasus-provider
          issuer: "https://sts.aws.local"
          aws: {account_id: "123456789"}
          attribute_condition: "assertion.arn.endsWith(':assumed-role/pegasus-iam-role/pegasus-sa')"
          attribute_mapping: {google.subject: "assertion.arn"}
          service_account: "pegasus-sa@pegasus-gcp-project"
          scopes: [gcs-pegasus-bucket]
actions:
  - do: assertion
    issuer: awssts
    audience: "https://iam.googleapis.com/pegasus-pool"
    claims: {arn: "arn:aws:sts::123456789:assumed-role/pegasus-iam-role/pegasus-sa", account_id: "123456789"}
    save: a1
    expect: ok
  - {do: exchange, token: a1, pool: pegasus-pool, provider: eks-pegasus-provider, save: fed, expect: ok}
  - {do: impersonate, federated: fed, account: "pegasus-sa@pegasus-gcp-project", save: cred, expect: ok}
  - {do: check_access, credential: cred, resource: gcs-pegasus-bucket, expect: allow}
  - {do: impersonate, federated: fed, account: "other-sa@pegasus-gcp-project", expect: "error:NotAuthorized"}
)yaml",

    // 3. a token minted for one service replayed against another
    R"yaml(
name: confused-deputy
description: >
  A token minted for the object-store audience is replayed against the token
  service provider pinned to a different audience; verification rejects it
  before any policy evaluation.
seed: 103
setup:
  idps:
    - {ref: gke, issuer: "https://idp.gcp.local"}
  pods:
    - {ref: pegasus0, idp: gke, namespace: pegasus, serviceaccount: pegasus-sa, pod_name: pegasus-0}
  providers:
    - {id: gke-pegasus-provider, idp: gke, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: pegasus-iam-role
      provider: gke-pegasus-provider
      scopes: [s3-pegasus-data]
      condition:
        "idp.gcp.local:sub": "system:serviceaccount:pegasus:pegasus-sa"
actions:
  - {do: token, pod: pegasus0, audience: storage.googleapis.com, ttl: 3600, save: stolen, expect: ok}
  - {do: assume_role, token: stolen, role: pegasus-iam-role, expect: "error:VerificationFailed/AudienceMismatch"}
)yaml",

    // 4. expiry enforcement on the identity token
    R"yaml(
name: expired-token
description: >
  A valid token presented after exp plus skew is rejected; nothing about the
  policy changes, only the clock.
seed: 104
setup:
  idps:
    - {ref: gke, issuer: "https://idp.gcp.local"}
  pods:
    - {ref: pegasus0, idp: gke, namespace: pegasus, serviceaccount: pegasus-sa, pod_name: pegasus-0}
  providers:
    - {id: gke-pegasus-provider, idp: gke, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: pegasus-iam-role
      provider: gke-pegasus-provider
      scopes: [s3-pegasus-data]
      condition:
        "idp.gcp.local:sub": "system:serviceaccount:pegasus:pegasus-sa"
actions:
  - {do: token, pod: pegasus0, audience: sts.amazonaws.com, ttl: 3600, save: tok, expect: ok}
  - {do: assume_role, token: tok, role: pegasus-iam-role, save: cred, expect: ok}
  - {do: advance_clock, seconds: 3631, expect: ok}
  - {do: assume_role, token: tok, role: pegasus-iam-role, expect: "error:VerificationFailed/Expired"}
)yaml",

    // 5. credential replay after its recorded expiry
    R"yaml(
name: replay-after-expiry
description: >
  A credential works until its recorded expiry and not a second longer; the
  identity token that produced it is equally dead afterwards.
seed: 105
setup:
  idps:
    - {ref: gke, issuer: "https://idp.gcp.local"}
  pods:
    - {ref: pegasus0, idp: gke, namespace: pegasus, serviceaccount: pegasus-sa, pod_name: pegasus-0}
  providers:
    - {id: gke-pegasus-provider, idp: gke, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: pegasus-iam-role
      provider: gke-pegasus-provider
      scopes: [s3-pegasus-data]
      condition:
        "idp.gcp.local:sub": "system:serviceaccount:pegasus:pegasus-sa"
actions:
  - {do: token, pod: pegasus0, audience: sts.amazonaws.com, ttl: 3600, save: tok, expect: ok}
  - {do: assume_role, token: tok, role: pegasus-iam-role, save: cred, expect: ok}
  - {do: check_access, credential: cred, resource: s3-pegasus-data, expect: allow}
  - {do: advance_clock, seconds: 3601, expect: ok}
  - {do: check_access, credential: cred, resource: s3-pegasus-data, expect: deny}
  - {do: advance_clock, seconds: 30, expect: ok}
  - {do: assume_role, token: tok, role: pegasus-iam-role, expect: "error:VerificationFailed/Expired"}
)yaml",

    // 6. near-miss audiences never match
    R"yaml(
name: audience-mismatch
description: >
  Audience comparison is literal membership; prefixes, suffixes and
  lookalikes of the pinned audience are all rejected.
seed: 106
setup:
  idps:
    - {ref: gke, issuer: "https://idp.gcp.local"}
  pods:
    - {ref: pegasus0, idp: gke, namespace: pegasus, serviceaccount: pegasus-sa, pod_name: pegasus-0}
  providers:
    - {id: gke-pegasus-provider, idp: gke, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: pegasus-iam-role
      provider: gke-pegasus-provider
      scopes: [s3-pegasus-data]
      condition:
        "idp.gcp.local:sub": "system:serviceaccount:pegasus:pegasus-sa"
actions:
  - {do: token, pod: pegasus0, audience: sts.amazonaws, ttl: 3600, save: t1, expect: ok}
  - {do: assume_role, token: t1, role: pegasus-iam-role, expect: "error:VerificationFailed/AudienceMismatch"}
  - {do: token, pod: pegasus0, audience: sts.amazonaws.com.evil.example, ttl: 3600, save: t2, expect: ok}
  - {do: assume_role, token: t2, role: pegasus-iam-role, expect: "error:VerificationFailed/AudienceMismatch"}
  - {do: token, pod: pegasus0, audience: STS.AMAZONAWS.COM, ttl: 3600, save: t3, expect: ok}
  - {do: assume_role, token: t3, role: pegasus-iam-role, expect: "error:VerificationFailed/AudienceMismatch"}
  - {do: token, pod: pegasus0, audience: sts.amazonaws.com, ttl: 3600, save: t4, expect: ok}
  - {do: assume_role, token: t4, role: pegasus-iam-role, expect: ok}
)yaml",

    // 7. deleting the provider cuts new trust instantly
    R"yaml(
name: provider-revocation
description: >
  Revoking the provider configuration fails all new exchanges immediately;
  credentials issued before revocation live exactly until their expiry.
seed: 107
setup:
  idps:
    - {ref: vendor, issuer: "https://idp.vendor.local"}
  pods:
    - {ref: vendor0, idp: vendor, namespace: vendor, serviceaccount: vendor-sa, pod_name: vendor-0}
  providers:
    - {id: vendor-provider, idp: vendor, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: vendor-role
      provider: vendor-provider
      scopes: [shared-dataset]
      condition:
        "idp.vendor.local:sub": "system:serviceaccount:vendor:vendor-sa"
actions:
  - {do: token, pod: vendor0, audience: sts.amazonaws.com, ttl: 3600, save: tok, expect: ok}
  - {do: assume_role, token: tok, role: vendor-role, save: cred, expect: ok}
  - {do: check_access, credential: cred, resource: shared-dataset, expect: allow}
  - {do: revoke_provider, provider: vendor-provider, expect: ok}
  - {do: token, pod: vendor0, audience: sts.amazonaws.com, ttl: 3600, save: tok2, expect: ok}
  - {do: assume_role, token: tok2, role: vendor-role, expect: "error:UnknownProvider"}
  - {do: check_access, credential: cred, resource: shared-dataset, expect: allow}
  - {do: advance_clock, seconds: 3600, expect: ok}
  - {do: check_access, credential: cred, resource: shared-dataset, expect: deny}
  - {do: revoke_provider, provider: vendor-provider, expect: "error:UnknownProvider"}
)yaml",

    // 8. the aging contrast: static signature vs bound token
    R"yaml(
name: stolen-static-key
description: >
  An exfiltrated static key signs requests that verify forever; the bound
  token from the same moment is dead after its hour. The pair of outcomes is
  the point.
seed: 108
setup:
  idps:
    - {ref: gke, issuer: "https://idp.gcp.local"}
  pods:
    - {ref: pegasus0, idp: gke, namespace: pegasus, serviceaccount: pegasus-sa, pod_name: pegasus-0}
  providers:
    - {id: gke-pegasus-provider, idp: gke, audiences: [sts.amazonaws.com]}
  trust_policies:
    - role: pegasus-iam-role
      provider: gke-pegasus-provider
      scopes: [s3-pegasus-data]
      condition:
        "idp.gcp.local:sub": "system:serviceaccount:pegasus:pegasus-sa"
  static_keys:
    - {id: AKIDEXAMPLE, secret: "wJalrXUtnFEMI/K7MDENG+bPxRfiCYEXAMPLEKEY", permissions: [s3-pegasus-data]}
actions:
  - {do: token, pod: pegasus0, audience: sts.amazonaws.com, ttl: 3600, save: tok, expect: ok}
  - {do: legacy_sign, key: AKIDEXAMPLE, date: "20250727", region: us-east-1, service: s3, save: sig, expect: ok}
  - {do: legacy_verify, signature: sig, expect: accept}
  - {do: legacy_verify, signature: sig, tamper: true, expect: reject}
  - {do: advance_clock, seconds: 157788000, expect: ok}
  - {do: legacy_verify, signature: sig, expect: accept}
  - {do: assume_role, token: tok, role: pegasus-iam-role, expect: "error:VerificationFailed/Expired"}
)yaml",

    // 9. two-hop pipeline: deploy in cloud A, then publish to cloud B
    R"yaml(
name: cicd-pipeline
description: >
  A pipeline workload deploys into its first target with an assumed role,
  then uses an assumed-role assertion to exchange into the second cloud and
  publish there. No static key exists anywhere on the path.
seed: 109
setup:
  stss:
    - {ref: aws}
    - {ref: gcp}
  idps:
    - {ref: cicd, issuer: "https://idp.cicd.local"}
  assertion_issuers:
    - {ref: awssts, issuer: "https://sts.aws.local"}
  pods:
    - {ref: deployer, idp: cicd, namespace: cicd, serviceaccount: deployer-sa, pod_name: deployer-0}
  providers:
    - {sts: aws, id: cicd-provider, idp: cicd, audiences: [sts.amazonaws.com]}
    - {sts: gcp, id: aws-assertions, issuer_ref: awssts, audiences: ["https://iam.googleapis.com/release-pool"]}
  trust_policies:
    - sts: aws
      role: deploy-role
      provider: cicd-provider
      scopes: [deploy-artifacts]
      condition:
        "idp.cicd.local:sub": "system:serviceaccount:cicd:deployer-sa"
        "idp.cicd.local:aud": "sts.amazonaws.com"
  pools:
    - sts: gcp
      id: release-pool
      providers:
        - provider_id: deploy-role-provider
          issuer: "https://sts.aws.local"
          attribute_condition: "assertion.arn.endsWith(':assumed-role/deploy-role/deployer-sa')"
          attribute_mapping: {google.subject: "assertion.arn"}
          service_account: "release-publisher@release-project"
          scopes: [gcs-release-bucket]
actions:
  - {do: token, pod: deployer, audience: sts.amazonaws.com, ttl: 3600, save: tok, expect: ok}
  - {do: assume_role, sts: aws, token: tok, role: deploy-role, save: cred_a, expect: ok}
  - {do: check_access, sts: aws, credential: cred_a, resource: deploy-artifacts, expect: allow}
  - do: assertion
    issuer: awssts
    audience: "https://iam.googleapis.com/release-pool"
    claims: {arn: "arn:aws:sts::123456789:assumed-role/deploy-role/deployer-sa"}
    save: hop
    expect: ok
  - {do: exchange, sts: gcp, token: hop, pool: release-pool, provider: deploy-role-provider, save: fed, expect: ok}
  - {do: impersonate, sts: gcp, federated: fed, account: "release-publisher@release-project", save: cred_b, expect: ok}
  - {do: check_access, sts: gcp, credential: cred_b, resource: gcs-release-bucket, expect: allow}
)yaml",
};

}  // namespace

std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> out;
    for (const char* yaml : kBuiltinYaml) {
        auto scenario = Scenario::from_yaml(yaml);
        // built-ins are compiled in; a parse failure is a programming error
        if (scenario.ok()) out.push_back(std::move(scenario).value());
    }
    return out;
}

Result<Scenario> find_builtin(const std::string& name) {
    for (auto& scenario : builtin_scenarios()) {
        if (scenario.name == name) return scenario;
    }
    return Error(Errc::ScenarioMalformed, "no built-in scenario named " + name);
}

}  // namespace fedauth::harness
