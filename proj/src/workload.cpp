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

#include "fedauth/workload.hpp"

#include "fedauth/trust_config.hpp"
#include "fedauth/wire.hpp"

namespace fedauth::client {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Wire helpers (shared with the HTTP layer)

namespace {

class InProcessIdpChannel final : public IdpChannel {
  public:
    explicit InProcessIdpChannel(std::shared_ptr<idp::IdpService> service)
        : service_(std::move(service)) {}

    Result<jwt::SignedJwt> request_token(const WorkloadConfig::Pod& pod,
                                         const std::string& audience,
                                         int64_t ttl) override {
        auto issued =
            service_->issue_bound_token(pod.pod_uid, {audience, ttl});
        if (!issued.ok()) return issued.error();
        return std::move(issued).value().token;
    }

  private:
    std::shared_ptr<idp::IdpService> service_;
};

class InProcessStsChannel final : public StsChannel {
  public:
    explicit InProcessStsChannel(std::shared_ptr<sts::StsService> service)
        : service_(std::move(service)) {}

    ExchangeResponse post_assume_role(const jwt::SignedJwt& token,
                                      const std::string& role) override {
        auto cred = service_->assume_role_with_web_identity(token, role);
        if (!cred.ok()) return to_error_response(cred.error());
        return {200, json{{"credential", wire::credential_to_json(cred.value())}}};
    }

    ExchangeResponse post_token_exchange(const jwt::SignedJwt& token,
                                         const std::string& pool,
                                         const std::string& provider) override {
        auto fed = service_->exchange_federated_token(token, pool, provider);
        if (!fed.ok()) return to_error_response(fed.error());
        return {200,
                json{{"federated_token", wire::federated_token_to_json(fed.value())}}};
    }

    ExchangeResponse post_impersonate(const std::string& federated_value,
                                      const std::string& account) override {
        auto cred =
            service_->impersonate_service_account(federated_value, account);
        if (!cred.ok()) return to_error_response(cred.error());
        return {200, json{{"credential", wire::credential_to_json(cred.value())}}};
    }

    ExchangeResponse post_resource_check(
        const sts::CredentialPresentation& presentation,
        const std::string& resource) override {
        bool allow = service_->check_access(presentation, resource);
        return {200, json{{"allow", allow}}};
    }

  private:
    static ExchangeResponse to_error_response(const Error& err) {
        return {wire::errc_http_status(err.code), wire::error_to_json(err)};
    }

    std::shared_ptr<sts::StsService> service_;
};

}  // namespace

std::unique_ptr<IdpChannel> make_inprocess_idp_channel(
    std::shared_ptr<idp::IdpService> service) {
    return std::make_unique<InProcessIdpChannel>(std::move(service));
}

std::unique_ptr<StsChannel> make_inprocess_sts_channel(
    std::shared_ptr<sts::StsService> service) {
    return std::make_unique<InProcessStsChannel>(std::move(service));
}

// ---------------------------------------------------------------------------
// Config

Result<WorkloadConfig> WorkloadConfig::from_yaml(const std::string& yaml_text) {
    auto converted = config::yaml_to_json(yaml_text);
    if (!converted.ok()) return converted.error();
    const json& doc = converted.value();
    if (!doc.is_object()) {
        return Error(Errc::ConfigInvalid, "workload config must be a map");
    }
    WorkloadConfig cfg;
    if (doc.contains("pod") && doc["pod"].is_object()) {
        const json& pod = doc["pod"];
        cfg.pod.ns = pod.value("namespace", "");
        cfg.pod.serviceaccount = pod.value("serviceaccount", "");
        cfg.pod.pod_uid = pod.value("pod_uid", "");
    }
    cfg.idp_endpoint = doc.value("idp", "");
    if (!doc.contains("target") || !doc["target"].is_object()) {
        return Error(Errc::ConfigInvalid, "workload config needs a target");
    }
    const json& target = doc["target"];
    cfg.target.sts_endpoint = target.value("sts", "");
    cfg.target.audience = target.value("audience", "");
    if (cfg.target.audience.empty()) {
        return Error(Errc::ConfigInvalid, "target needs an audience");
    }
    const std::string flow = target.value("flow", "assume-role");
    if (flow == "assume-role") {
        cfg.target.flow = FlowKind::AssumeRole;
        cfg.target.role = target.value("role", "");
        if (cfg.target.role.empty()) {
            return Error(Errc::ConfigInvalid, "assume-role flow needs a role");
        }
    } else if (flow == "pool-exchange") {
        cfg.target.flow = FlowKind::PoolExchange;
        cfg.target.pool = target.value("pool", "");
        cfg.target.provider = target.value("provider", "");
        cfg.target.service_account = target.value("service_account", "");
        if (cfg.target.pool.empty() || cfg.target.provider.empty() ||
            cfg.target.service_account.empty()) {
            return Error(Errc::ConfigInvalid,
                         "pool-exchange flow needs pool, provider and "
                         "service_account");
        }
    } else {
        return Error(Errc::ConfigInvalid, "unknown flow kind: " + flow);
    }
    if (doc.contains("token_ttl")) cfg.token_ttl = doc["token_ttl"].get<int64_t>();
    if (doc.contains("refresh_margin")) {
        cfg.refresh_margin = doc["refresh_margin"].get<int64_t>();
    }
    const int64_t min_credential_lifetime =
        std::min<int64_t>(sts::kMaxCredentialLifetime, cfg.token_ttl);
    if (cfg.refresh_margin >= min_credential_lifetime) {
        return Error(Errc::ConfigInvalid,
                     "refresh_margin must be below the minimum credential "
                     "lifetime");
    }
    return cfg;
}

json WorkloadConfig::to_json() const {
    json doc;
    doc["pod"] = {{"namespace", pod.ns},
                  {"serviceaccount", pod.serviceaccount},
                  {"pod_uid", pod.pod_uid}};
    doc["idp"] = idp_endpoint;
    json target_json{{"sts", target.sts_endpoint},
                     {"audience", target.audience}};
    if (target.flow == FlowKind::AssumeRole) {
        target_json["flow"] = "assume-role";
        target_json["role"] = target.role;
    } else {
        target_json["flow"] = "pool-exchange";
        target_json["pool"] = target.pool;
        target_json["provider"] = target.provider;
        target_json["service_account"] = target.service_account;
    }
    doc["target"] = target_json;
    doc["token_ttl"] = token_ttl;
    doc["refresh_margin"] = refresh_margin;
    return doc;
}

Result<CredentialView> CredentialView::from_json(const json& body) {
    if (!body.is_object() || !body.contains("credential") ||
        !body["credential"].is_object()) {
        return Error(Errc::ExchangeFailed, "response carries no credential");
    }
    const json& c = body["credential"];
    CredentialView view;
    view.credential_id = c.value("credential_id", "");
    view.secret = c.value("secret", "");
    view.session_token = c.value("session_token", "");
    view.expires_at = c.value("expires_at", int64_t{0});
    view.principal = c.value("principal", "");
    if (c.contains("scopes") && c["scopes"].is_array()) {
        for (const auto& s : c["scopes"]) view.scopes.push_back(s);
    }
    if (view.credential_id.empty() || view.secret.empty()) {
        return Error(Errc::ExchangeFailed, "credential fields missing");
    }
    return view;
}

// ---------------------------------------------------------------------------
// Client

WorkloadClient::WorkloadClient(WorkloadConfig config,
                               std::unique_ptr<IdpChannel> idp,
                               std::unique_ptr<StsChannel> sts,
                               std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      idp_(std::move(idp)),
      sts_(std::move(sts)),
      clock_(std::move(clock)) {}

Result<jwt::SignedJwt> WorkloadClient::get_oidc_token() {
    auto token = idp_->request_token(config_.pod, config_.target.audience,
                                     config_.token_ttl);
    if (!token.ok()) {
        return Error(Errc::TokenAcquisitionFailed,
                     "token acquisition failed: " + token.error().to_string(),
                     token.error().code);
    }
    return token;
}

ExchangeResponse WorkloadClient::post_with_retry(
    const std::function<ExchangeResponse()>& send) {
    ExchangeResponse resp = send();
    // one retry on transport failure; typed denials are never retried
    if (resp.status == 0) resp = send();
    return resp;
}

Result<CredentialView> WorkloadClient::federated_exchange() {
    std::lock_guard lock(mu_);
    return refresh_locked();
}

Result<CredentialView> WorkloadClient::refresh_locked() {
    // token acquisition; a null token aborts before any exchange
    auto token = get_oidc_token();
    if (!token.ok()) return token.error();

    ++exchange_count_;

    auto fail = [](const ExchangeResponse& resp) {
        Error inner = wire::error_from_json(resp.body, resp.status);
        if (resp.status == 0) {
            return Error(Errc::ExchangeFailed, "exchange failed: transport error",
                         Errc::TransportError);
        }
        return Error(Errc::ExchangeFailed,
                     "exchange failed with status " +
                         std::to_string(resp.status) + ": " + inner.to_string(),
                     inner.cause.value_or(inner.code));
    };

    CredentialView credential;
    if (config_.target.flow == FlowKind::AssumeRole) {
        auto resp = post_with_retry([&] {
            return sts_->post_assume_role(token.value(), config_.target.role);
        });
        if (resp.status != 200) return fail(resp);
        auto parsed = CredentialView::from_json(resp.body);
        if (!parsed.ok()) return parsed.error();
        credential = std::move(parsed).value();
    } else {
        // pool flow: exchange then impersonation as one logical step
        auto resp = post_with_retry([&] {
            return sts_->post_token_exchange(token.value(), config_.target.pool,
                                             config_.target.provider);
        });
        if (resp.status != 200) return fail(resp);
        if (!resp.body.contains("federated_token") ||
            !resp.body["federated_token"].is_object()) {
            return Error(Errc::ExchangeFailed,
                         "response carries no federated token");
        }
        const std::string fed_value =
            resp.body["federated_token"].value("value", "");
        auto imp = post_with_retry([&] {
            return sts_->post_impersonate(fed_value,
                                          config_.target.service_account);
        });
        if (imp.status != 200) return fail(imp);
        auto parsed = CredentialView::from_json(imp.body);
        if (!parsed.ok()) return parsed.error();
        credential = std::move(parsed).value();
    }

    cache_ = credential;
    // `token` goes out of scope here; the identity token is not retained.
    return credential;
}

Result<bool> WorkloadClient::access_resource(const std::string& resource_label) {
    std::lock_guard lock(mu_);
    const int64_t now = clock_->now();
    if (!cache_ || now + config_.refresh_margin >= cache_->expires_at) {
        auto refreshed = refresh_locked();
        if (!refreshed.ok()) return refreshed.error();
    }
    auto resp = sts_->post_resource_check(
        {cache_->credential_id, cache_->secret, cache_->session_token},
        resource_label);
    if (resp.status != 200) {
        return Error(Errc::TransportError, "resource check failed with status " +
                                               std::to_string(resp.status));
    }
    return resp.body.value("allow", false);
}

std::string WorkloadClient::state_dump() const {
    std::lock_guard lock(mu_);
    json state;
    state["config"] = config_.to_json();
    if (cache_) {
        state["cache"] = {{"credential_id", cache_->credential_id},
                          {"secret", cache_->secret},
                          {"session_token", cache_->session_token},
                          {"expires_at", cache_->expires_at},
                          {"principal", cache_->principal}};
    }
    return state.dump();
}

}  // namespace fedauth::client
