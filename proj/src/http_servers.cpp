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

#include "fedauth/http_servers.hpp"

#include <thread>
#include <utility>

#include <httplib.h>

#include "fedauth/trust_config.hpp"
#include "fedauth/wire.hpp"

namespace fedauth::http {

using nlohmann::json;

namespace {

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    return body.is_discarded() ? json{} : body;
}

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, const Error& err) {
    reply_json(res, wire::errc_http_status(err.code), wire::error_to_json(err));
}

// Splits "http://host:port/path" into base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme = url.find("://");
    size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

class HttplibServer final : public Server {
  public:
    explicit HttplibServer(std::function<void(httplib::Server&)> wire) {
        wire(svr_);
    }

    ~HttplibServer() override { stop(); }

    Result<int> start(const std::string& host, int port) override {
        if (port == 0) {
            port_ = svr_.bind_to_any_port(host);
            if (port_ < 0) {
                return Error(Errc::StartupFailure,
                             "could not bind to any port on " + host);
            }
        } else {
            if (!svr_.bind_to_port(host, port)) {
                return Error(Errc::StartupFailure,
                             "could not bind " + host + ":" +
                                 std::to_string(port));
            }
            port_ = port;
        }
        thread_ = std::thread([this] { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
        return port_;
    }

    void stop() override {
        if (thread_.joinable()) {
            svr_.stop();
            thread_.join();
        }
    }

    [[nodiscard]] int port() const override { return port_; }

  private:
    httplib::Server svr_;
    std::thread thread_;
    int port_ = -1;
};

}  // namespace

std::unique_ptr<Server> make_idp_server(std::shared_ptr<idp::IdpService> idp) {
    auto wire = [idp](httplib::Server& svr) {
        svr.Get("/.well-known/openid-configuration",
                [idp](const httplib::Request&, httplib::Response& res) {
                    reply_json(res, 200, idp->discovery_document());
                });
        svr.Get("/openid/v1/jwks",
                [idp](const httplib::Request&, httplib::Response& res) {
                    reply_json(res, 200, idp->jwks().to_json());
                });
        svr.Post("/token", [idp](const httplib::Request& req,
                                 httplib::Response& res) {
            json body = parse_body(req);
            if (body.contains("audience") && body["audience"].is_array()) {
                reply_error(res,
                            Error(Errc::InvalidClaims,
                                  "bound tokens carry exactly one audience"));
                return;
            }
            const std::string pod_uid = body.value("pod_uid", "");
            auto pod = idp->find_pod(pod_uid);
            if (!pod) {
                reply_error(res,
                            Error(Errc::UnknownPod, "no pod with uid " + pod_uid));
                return;
            }
            if (pod->service_account.ns != body.value("namespace", "") ||
                pod->service_account.name != body.value("serviceaccount", "")) {
                reply_error(res, Error(Errc::UnknownPod,
                                       "pod identity does not match request"));
                return;
            }
            idp::TokenRequestSpec spec;
            spec.audience = body.value("audience", "");
            spec.expiration_seconds =
                body.value("expiration_seconds", idp->config().default_ttl);
            auto issued = idp->issue_bound_token(pod_uid, spec);
            if (!issued.ok()) {
                reply_error(res, issued.error());
                return;
            }
            reply_json(res, 200,
                       json{{"token", issued.value().token.compact},
                            {"expiration_timestamp", issued.value().expires_at}});
        });
        svr.Post("/admin/register-pod", [idp](const httplib::Request& req,
                                              httplib::Response& res) {
            json body = parse_body(req);
            idp::ServiceAccount sa{body.value("namespace", ""),
                                   body.value("serviceaccount", "")};
            auto pod = idp->register_pod(sa, body.value("pod_name", ""));
            if (!pod.ok()) {
                reply_error(res, pod.error());
                return;
            }
            reply_json(res, 200,
                       json{{"namespace", pod.value().service_account.ns},
                            {"serviceaccount", pod.value().service_account.name},
                            {"pod_name", pod.value().pod_name},
                            {"pod_uid", pod.value().pod_uid}});
        });
        svr.Post("/admin/rotate-key",
                 [idp](const httplib::Request&, httplib::Response& res) {
                     auto rotation = idp->rotate_key();
                     reply_json(res, 200,
                                json{{"key_id", rotation.new_key_id},
                                     {"jwks", rotation.jwks.to_json()}});
                 });
    };
    return std::make_unique<HttplibServer>(wire);
}

std::unique_ptr<Server> make_sts_server(std::shared_ptr<sts::StsService> sts) {
    auto wire = [sts](httplib::Server& svr) {
        svr.Post("/v1/assume-role", [sts](const httplib::Request& req,
                                          httplib::Response& res) {
            json body = parse_body(req);
            auto cred = sts->assume_role_with_web_identity(
                jwt::SignedJwt{body.value("token", "")},
                body.value("role", ""));
            if (!cred.ok()) {
                reply_error(res, cred.error());
                return;
            }
            reply_json(res, 200,
                       json{{"credential", wire::credential_to_json(cred.value())}});
        });
        svr.Post("/v1/token-exchange", [sts](const httplib::Request& req,
                                             httplib::Response& res) {
            json body = parse_body(req);
            auto fed = sts->exchange_federated_token(
                jwt::SignedJwt{body.value("token", "")},
                body.value("pool", ""), body.value("provider", ""));
            if (!fed.ok()) {
                reply_error(res, fed.error());
                return;
            }
            reply_json(
                res, 200,
                json{{"federated_token", wire::federated_token_to_json(fed.value())}});
        });
        svr.Post("/v1/impersonate", [sts](const httplib::Request& req,
                                          httplib::Response& res) {
            json body = parse_body(req);
            auto cred = sts->impersonate_service_account(
                body.value("federated_token", ""), body.value("account", ""));
            if (!cred.ok()) {
                reply_error(res, cred.error());
                return;
            }
            reply_json(res, 200,
                       json{{"credential", wire::credential_to_json(cred.value())}});
        });
        svr.Post("/v1/resource/check", [sts](const httplib::Request& req,
                                             httplib::Response& res) {
            json body = parse_body(req);
            bool allow = sts->check_access(
                {body.value("credential_id", ""), body.value("secret", ""),
                 body.value("session_token", "")},
                body.value("resource", ""));
            reply_json(res, 200, json{{"allow", allow}});
        });

        // admin surface
        svr.Post("/admin/provider", [sts](const httplib::Request& req,
                                          httplib::Response& res) {
            auto reg = config::parse_provider_registration(parse_body(req));
            if (!reg.ok()) {
                reply_error(res, reg.error());
                return;
            }
            auto id = sts->register_provider(std::move(reg).value());
            if (!id.ok()) {
                reply_error(res, id.error());
                return;
            }
            reply_json(res, 200, json{{"provider_id", id.value()}});
        });
        svr.Post("/admin/trust-policy", [sts](const httplib::Request& req,
                                              httplib::Response& res) {
            auto policy = config::parse_trust_policy(parse_body(req));
            if (!policy.ok()) {
                reply_error(res, policy.error());
                return;
            }
            std::string role = policy.value().role_name;
            auto applied = sts->apply_trust_policy(std::move(policy).value());
            if (!applied.ok()) {
                reply_error(res, applied.error());
                return;
            }
            reply_json(res, 200, json{{"role", role}});
        });
        svr.Post("/admin/pool", [sts](const httplib::Request& req,
                                      httplib::Response& res) {
            auto pool = config::parse_pool(parse_body(req));
            if (!pool.ok()) {
                reply_error(res, pool.error());
                return;
            }
            std::string id = pool.value().pool_id;
            auto applied = sts->apply_pool(std::move(pool).value());
            if (!applied.ok()) {
                reply_error(res, applied.error());
                return;
            }
            reply_json(res, 200, json{{"pool_id", id}});
        });
        svr.Delete(R"(/admin/provider/(.+))", [sts](const httplib::Request& req,
                                                    httplib::Response& res) {
            auto revoked = sts->revoke_provider(req.matches[1]);
            if (!revoked.ok()) {
                reply_error(res, revoked.error());
                return;
            }
            reply_json(res, 200, json{{"revoked", std::string(req.matches[1])}});
        });
    };
    return std::make_unique<HttplibServer>(wire);
}

std::unique_ptr<Server> make_resource_server(AccessCheck check) {
    auto wire = [check = std::move(check)](httplib::Server& svr) {
        svr.Get(R"(/data/(.+))", [check](const httplib::Request& req,
                                         httplib::Response& res) {
            sts::CredentialPresentation presentation{
                req.get_header_value("X-Credential-Id"),
                req.get_header_value("X-Credential-Secret"),
                req.get_header_value("X-Session-Token")};
            const std::string label = req.matches[1];
            if (check(presentation, label)) {
                reply_json(res, 200,
                           json{{"resource", label}, {"data", "ok"}});
            } else {
                reply_json(res, 403, json{{"error", "access denied"}});
            }
        });
    };
    return std::make_unique<HttplibServer>(wire);
}

namespace {

class HttpIdpChannel final : public client::IdpChannel {
  public:
    explicit HttpIdpChannel(std::string base_url)
        : base_url_(std::move(base_url)) {}

    Result<jwt::SignedJwt> request_token(const client::WorkloadConfig::Pod& pod,
                                         const std::string& audience,
                                         int64_t ttl) override {
        httplib::Client cli(base_url_);
        json body{{"namespace", pod.ns},
                  {"serviceaccount", pod.serviceaccount},
                  {"pod_uid", pod.pod_uid},
                  {"audience", audience},
                  {"expiration_seconds", ttl}};
        auto res = cli.Post("/token", body.dump(), "application/json");
        if (!res) {
            return Error(Errc::TransportError,
                         "identity provider unreachable at " + base_url_);
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (res->status != 200) {
            return wire::error_from_json(parsed, res->status);
        }
        if (parsed.is_discarded() || !parsed.contains("token")) {
            return Error(Errc::TransportError, "token response unparsable");
        }
        return jwt::SignedJwt{parsed["token"].get<std::string>()};
    }

  private:
    std::string base_url_;
};

class HttpStsChannel final : public client::StsChannel {
  public:
    explicit HttpStsChannel(std::string base_url)
        : base_url_(std::move(base_url)) {}

    client::ExchangeResponse post_assume_role(const jwt::SignedJwt& token,
                                              const std::string& role) override {
        return post("/v1/assume-role",
                    json{{"token", token.compact}, {"role", role}});
    }
    client::ExchangeResponse post_token_exchange(
        const jwt::SignedJwt& token, const std::string& pool,
        const std::string& provider) override {
        return post("/v1/token-exchange", json{{"token", token.compact},
                                               {"pool", pool},
                                               {"provider", provider}});
    }
    client::ExchangeResponse post_impersonate(
        const std::string& federated_value,
        const std::string& account) override {
        return post("/v1/impersonate", json{{"federated_token", federated_value},
                                            {"account", account}});
    }
    client::ExchangeResponse post_resource_check(
        const sts::CredentialPresentation& presentation,
        const std::string& resource) override {
        return post("/v1/resource/check",
                    json{{"credential_id", presentation.credential_id},
                         {"secret", presentation.secret},
                         {"session_token", presentation.session_token},
                         {"resource", resource}});
    }

  private:
    client::ExchangeResponse post(const std::string& path, const json& body) {
        httplib::Client cli(base_url_);
        auto res = cli.Post(path, body.dump(), "application/json");
        if (!res) return {0, {}};
        json parsed = json::parse(res->body, nullptr, false);
        return {res->status, parsed.is_discarded() ? json{} : parsed};
    }

    std::string base_url_;
};

}  // namespace

std::unique_ptr<client::IdpChannel> make_http_idp_channel(std::string base_url) {
    return std::make_unique<HttpIdpChannel>(std::move(base_url));
}

std::unique_ptr<client::StsChannel> make_http_sts_channel(std::string base_url) {
    return std::make_unique<HttpStsChannel>(std::move(base_url));
}

sts::JwksFetcher http_jwks_fetcher() {
    return [](const std::string& uri) -> Result<jwt::JwkSet> {
        auto [base, path] = split_url(uri);
        httplib::Client cli(base);
        auto res = cli.Get(path);
        if (!res || res->status != 200) {
            return Error(Errc::JwksUnreachable, "GET " + uri + " failed");
        }
        json doc = json::parse(res->body, nullptr, false);
        if (doc.is_discarded()) {
            return Error(Errc::JwksUnreachable, "JWKS body is not JSON");
        }
        auto set = jwt::JwkSet::from_json(doc);
        if (!set.ok()) return set.error();
        return std::move(set).value();
    };
}

Result<json> http_post_json(const std::string& base_url, const std::string& path,
                            const json& body) {
    httplib::Client cli(base_url);
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res) {
        return Error(Errc::TransportError, base_url + " unreachable");
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
        return wire::error_from_json(parsed.is_discarded() ? json{} : parsed,
                                     res->status);
    }
    return parsed.is_discarded() ? json{} : parsed;
}

Result<json> http_get_json(const std::string& url) {
    auto [base, path] = split_url(url);
    httplib::Client cli(base);
    auto res = cli.Get(path);
    if (!res) return Error(Errc::TransportError, url + " unreachable");
    json parsed = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
        return wire::error_from_json(parsed.is_discarded() ? json{} : parsed,
                                     res->status);
    }
    return parsed.is_discarded() ? json{} : parsed;
}

Result<json> http_delete(const std::string& base_url, const std::string& path) {
    httplib::Client cli(base_url);
    auto res = cli.Delete(path);
    if (!res) return Error(Errc::TransportError, base_url + " unreachable");
    json parsed = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
        return wire::error_from_json(parsed.is_discarded() ? json{} : parsed,
                                     res->status);
    }
    return parsed.is_discarded() ? json{} : parsed;
}

}  // namespace fedauth::http
