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

// HTTP faces of the services. The bodies and status codes are identical to
// the in-process channels, wire.hpp being the single source of both.
//
// Identity provider:
//   GET  /.well-known/openid-configuration
//   GET  /openid/v1/jwks
//   POST /token            {namespace, serviceaccount, pod_uid, audience,
//                           expiration_seconds} -> {token, expiration_timestamp}
//   POST /admin/register-pod {namespace, serviceaccount, pod_name}
//
// Token service:
//   POST /v1/assume-role    {token, role}
//   POST /v1/token-exchange {token, pool, provider}
//   POST /v1/impersonate    {federated_token, account}
//   POST /v1/resource/check {credential_id, secret, session_token, resource}
//   POST /admin/trust-policy | /admin/pool | /admin/provider
//   DELETE /admin/provider/<id>
//
// Mock resource:
//   GET /data/<label> with X-Credential-Id / X-Credential-Secret /
//   X-Session-Token headers -> 200 or 403

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "fedauth/error.hpp"
#include "fedauth/idp.hpp"
#include "fedauth/sts.hpp"
#include "fedauth/workload.hpp"

namespace fedauth::http {

class Server {
  public:
    virtual ~Server() = default;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    virtual Result<int> start(const std::string& host, int port) = 0;
    virtual void stop() = 0;
    [[nodiscard]] virtual int port() const = 0;
};

std::unique_ptr<Server> make_idp_server(std::shared_ptr<idp::IdpService> idp);
std::unique_ptr<Server> make_sts_server(std::shared_ptr<sts::StsService> sts);

/// Resource server decision hook: in-process wiring binds StsService
/// directly, the CLI binds an HTTP call to a remote token service.
using AccessCheck =
    std::function<bool(const sts::CredentialPresentation&, const std::string&)>;

std::unique_ptr<Server> make_resource_server(AccessCheck check);

/// Client channels over HTTP, for running the workload against live servers.
std::unique_ptr<client::IdpChannel> make_http_idp_channel(std::string base_url);
std::unique_ptr<client::StsChannel> make_http_sts_channel(std::string base_url);

/// JWKS fetcher doing a real GET against `uri`.
sts::JwksFetcher http_jwks_fetcher();

/// Admin client helpers used by the CLI.
Result<nlohmann::json> http_post_json(const std::string& base_url,
                                      const std::string& path,
                                      const nlohmann::json& body);
Result<nlohmann::json> http_get_json(const std::string& url);
Result<nlohmann::json> http_delete(const std::string& base_url,
                                   const std::string& path);

}  // namespace fedauth::http
