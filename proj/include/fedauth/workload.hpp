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

// The workload: a transient token-bearer. Acquires a bound token from its
// identity provider, exchanges it for a native credential, accesses the
// resource, and never retains the identity token afterwards.

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fedauth/clock.hpp"
#include "fedauth/error.hpp"
#include "fedauth/idp.hpp"
#include "fedauth/jwt.hpp"
#include "fedauth/sts.hpp"

namespace fedauth::client {

enum class FlowKind { AssumeRole, PoolExchange };

struct WorkloadConfig {
    struct Pod {
        std::string ns;
        std::string serviceaccount;
        std::string pod_uid;
    } pod;

    std::string idp_endpoint;  // informational in in-process mode

    struct Target {
        std::string sts_endpoint;
        std::string audience;
        FlowKind flow = FlowKind::AssumeRole;
        std::string role;             // assume-role flow
        std::string pool;             // pool-exchange flow
        std::string provider;         // pool-exchange flow
        std::string service_account;  // impersonation target
    } target;

    int64_t token_ttl = 3600;
    int64_t refresh_margin = 60;  // must stay below credential lifetime

    static Result<WorkloadConfig> from_yaml(const std::string& yaml_text);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Token acquisition channel. A transport failure returns TransportError;
/// the client maps any failure to TokenAcquisitionFailed.
class IdpChannel {
  public:
    virtual ~IdpChannel() = default;
    virtual Result<jwt::SignedJwt> request_token(const WorkloadConfig::Pod& pod,
                                                 const std::string& audience,
                                                 int64_t ttl) = 0;
};

/// Exchange response in status/body shape. status 0 means the transport
/// itself failed; anything != 200 is a typed denial carried in the body.
struct ExchangeResponse {
    int status = 0;
    nlohmann::json body;
};

class StsChannel {
  public:
    virtual ~StsChannel() = default;
    virtual ExchangeResponse post_assume_role(const jwt::SignedJwt& token,
                                              const std::string& role) = 0;
    virtual ExchangeResponse post_token_exchange(const jwt::SignedJwt& token,
                                                 const std::string& pool,
                                                 const std::string& provider) = 0;
    virtual ExchangeResponse post_impersonate(const std::string& federated_value,
                                              const std::string& account) = 0;
    virtual ExchangeResponse post_resource_check(
        const sts::CredentialPresentation& presentation,
        const std::string& resource) = 0;
};

std::unique_ptr<IdpChannel> make_inprocess_idp_channel(
    std::shared_ptr<idp::IdpService> service);
std::unique_ptr<StsChannel> make_inprocess_sts_channel(
    std::shared_ptr<sts::StsService> service);

/// Client-side view of an issued credential.
struct CredentialView {
    std::string credential_id;
    std::string secret;
    std::string session_token;
    int64_t expires_at = 0;
    std::vector<std::string> scopes;
    std::string principal;

    static Result<CredentialView> from_json(const nlohmann::json& body);
};

class WorkloadClient {
  public:
    WorkloadClient(WorkloadConfig config, std::unique_ptr<IdpChannel> idp,
                   std::unique_ptr<StsChannel> sts,
                   std::shared_ptr<Clock> clock);

    /// Step 1: audience-bound token from the local identity provider.
    Result<jwt::SignedJwt> get_oidc_token();

    /// The exchange: acquire token, post to the token service, parse the
    /// credential. Null token -> TokenAcquisitionFailed; non-success
    /// exchange status -> ExchangeFailed carrying the denial kind. For the
    /// pool flow, exchange and impersonation run as one logical step. The
    /// identity token is a local value discarded on return.
    Result<CredentialView> federated_exchange();

    /// Uses the cached credential, refreshing when inside the refresh
    /// margin; returns the resource decision.
    Result<bool> access_resource(const std::string& resource_label);

    /// Serialized durable state (config + cache), used to prove the client
    /// retains no identity token or signing key.
    [[nodiscard]] std::string state_dump() const;

    [[nodiscard]] int exchange_count() const { return exchange_count_; }

  private:
    Result<CredentialView> refresh_locked();
    ExchangeResponse post_with_retry(
        const std::function<ExchangeResponse()>& send);

    WorkloadConfig config_;
    std::unique_ptr<IdpChannel> idp_;
    std::unique_ptr<StsChannel> sts_;
    std::shared_ptr<Clock> clock_;

    mutable std::mutex mu_;  // refresh is serialized
    std::optional<CredentialView> cache_;
    int exchange_count_ = 0;
};

}  // namespace fedauth::client
