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

#include <doctest.h>

#include "condition_oracle.hpp"
#include "fedauth/condition.hpp"

using namespace fedauth;
using namespace fedauth::cond;

namespace {

const char* kProviderCondition =
    "assertion.arn.endsWith(':assumed-role/pegasus-iam-role/pegasus-sa')";

AssertionContext arn_context(const std::string& arn) {
    AssertionContext ctx;
    ctx.set("arn", arn);
    return ctx;
}

}  // namespace

TEST_CASE("parses the provider-config endsWith condition") {
    auto parsed = parse_condition(kProviderCondition);
    REQUIRE(parsed.ok());
    const auto* call = std::get_if<MethodCall>(&parsed.value()->node);
    REQUIRE(call != nullptr);
    CHECK(call->method == Method::EndsWith);
    CHECK(call->argument == ":assumed-role/pegasus-iam-role/pegasus-sa");
    const auto* path = std::get_if<AttributePath>(&call->receiver->node);
    REQUIRE(path != nullptr);
    CHECK(path->parts == std::vector<std::string>{"arn"});
}

TEST_CASE("evaluates the provider condition against sample assertions") {
    auto expr = parse_condition(kProviderCondition).value();

    auto matching = arn_context(
        "arn:aws:sts::123456789:assumed-role/pegasus-iam-role/pegasus-sa");
    auto verdict = eval_condition(expr, matching);
    REQUIRE(verdict.ok());
    CHECK(verdict.value());

    auto other = arn_context(
        "arn:aws:sts::123456789:assumed-role/other-role/other-sa");
    auto denied = eval_condition(expr, other);
    REQUIRE(denied.ok());
    CHECK_FALSE(denied.value());
}

TEST_CASE("reflexive equality over any context defining the attribute") {
    auto expr = parse_condition("assertion.sub == assertion.sub").value();
    CHECK(std::get_if<Equality>(&expr->node) != nullptr);
    AssertionContext ctx;
    ctx.set("sub", "anything at all");
    auto verdict = eval_condition(expr, ctx);
    REQUIRE(verdict.ok());
    CHECK(verdict.value());
}

TEST_CASE("missing attribute is an error, not false") {
    auto expr = parse_condition("assertion.sub == 'x'").value();
    auto verdict = eval_condition(expr, AssertionContext{});
    REQUIRE_FALSE(verdict.ok());
    CHECK(verdict.error().code == Errc::MissingAttribute);
    CHECK(verdict.error().message == "assertion.sub");
}

TEST_CASE("short-circuit keeps missing attributes unevaluated") {
    AssertionContext ctx;  // no attributes at all

    auto and_expr = parse_condition(
        "'a' == 'b' && assertion.gone.endsWith('x')").value();
    auto and_verdict = eval_condition(and_expr, ctx);
    REQUIRE(and_verdict.ok());
    CHECK_FALSE(and_verdict.value());

    auto or_expr = parse_condition(
        "'a' == 'a' || assertion.gone.endsWith('x')").value();
    auto or_verdict = eval_condition(or_expr, ctx);
    REQUIRE(or_verdict.ok());
    CHECK(or_verdict.value());

    // the other operand order does raise
    auto strict = parse_condition(
        "assertion.gone.endsWith('x') && 'a' == 'b'").value();
    CHECK_FALSE(eval_condition(strict, ctx).ok());
}

TEST_CASE("type errors are reported, never silently coerced") {
    AssertionContext ctx;
    ctx.set("sub", "s");

    auto bare_string = parse_condition("assertion.sub").value();
    auto verdict = eval_condition(bare_string, ctx);
    REQUIRE_FALSE(verdict.ok());
    CHECK(verdict.error().code == Errc::TypeMismatch);

    auto not_string = parse_condition("!assertion.sub").value();
    CHECK(eval_condition(not_string, ctx).error().code == Errc::TypeMismatch);

    auto bool_operand = parse_condition(
        "(assertion.sub == 'a') == 'true'").value();
    CHECK(eval_condition(bool_operand, ctx).error().code == Errc::TypeMismatch);
}

TEST_CASE("syntax errors carry offsets and expected tokens") {
    auto missing_paren = parse_condition("assertion.arn.endsWith('x'");
    REQUIRE_FALSE(missing_paren.ok());
    CHECK(missing_paren.error().code == Errc::SyntaxError);
    CHECK(missing_paren.error().message.find("offset") != std::string::npos);
    CHECK(missing_paren.error().message.find("')'") != std::string::npos);

    auto dangling = parse_condition("assertion.arn.endsWith 'x'");
    REQUIRE_FALSE(dangling.ok());
    CHECK(dangling.error().message.find("end of input") != std::string::npos);

    auto bad_root = parse_condition("attribute.arn == 'x'");
    REQUIRE_FALSE(bad_root.ok());
    CHECK(bad_root.error().message.find("'assertion'") != std::string::npos);

    auto bad_method = parse_condition("assertion.arn.matches('x')");
    REQUIRE_FALSE(bad_method.ok());
    CHECK(bad_method.error().message.find("endsWith") != std::string::npos);

    auto single_amp = parse_condition("assertion.a == 'x' & assertion.b == 'y'");
    REQUIRE_FALSE(single_amp.ok());
    CHECK(single_amp.error().message.find("'&&'") != std::string::npos);

    auto oversize = parse_condition(std::string(4097, ' '));
    REQUIRE_FALSE(oversize.ok());
    CHECK(oversize.error().code == Errc::SyntaxError);
}

TEST_CASE("nesting beyond the depth bound is rejected") {
    std::string deep = "'x' == 'x'";
    for (int i = 0; i < 40; ++i) deep = "(" + deep + ")";
    auto parsed = parse_condition(deep);
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.error().code == Errc::DepthExceeded);

    std::string bangs(40, '!');
    auto negated = parse_condition(bangs + "('a' == 'a')");
    REQUIRE_FALSE(negated.ok());
    CHECK(negated.error().code == Errc::DepthExceeded);

    // depth 32 exactly still parses
    std::string ok_expr = "'x' == 'x'";
    for (int i = 0; i < 28; ++i) ok_expr = "(" + ok_expr + ")";
    CHECK(parse_condition(ok_expr).ok());
}

TEST_CASE("print/parse fixpoint on 500 generated ASTs") {
    oracle::AstGenerator gen(4242);
    for (int i = 0; i < 500; ++i) {
        auto ast = gen.random_any_expr(6);
        std::string printed = print_expr(ast);
        auto reparsed = parse_condition(printed);
        REQUIRE_MESSAGE(reparsed.ok(), printed);
        CHECK_MESSAGE(expr_equal(ast, reparsed.value()), printed);
        // and printing again is stable
        CHECK(print_expr(reparsed.value()) == printed);
    }
}

TEST_CASE("evaluator agrees with the brute-force oracle on 10k cases") {
    oracle::AstGenerator gen(977);
    int disagreements = 0;
    for (int i = 0; i < 10'000; ++i) {
        auto ast = gen.random_any_expr(5);
        auto ctx = gen.random_context();
        auto expected = oracle::oracle_outcome(ast, ctx);
        auto actual = oracle::library_outcome(eval_condition(ast, ctx));
        if (expected != actual) {
            ++disagreements;
            CAPTURE(print_expr(ast));
            CHECK(expected == actual);
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("evaluator total over parsed fuzz inputs") {
    // parse garbage-adjacent strings; whatever parses must evaluate to a
    // clean result or typed error, never crash
    oracle::AstGenerator gen(1313);
    std::mt19937_64 rng(555);
    const std::string pieces[] = {
        "assertion.arn", "'x'", "==", "!=", "&&", "||", "(", ")", "!",
        ".endsWith('y')", ".startsWith('')", ".contains('a')", "assertion.gone",
    };
    for (int i = 0; i < 2'000; ++i) {
        std::string source;
        std::uniform_int_distribution<size_t> count(1, 8);
        std::uniform_int_distribution<size_t> pick(0, std::size(pieces) - 1);
        size_t n = count(rng);
        for (size_t j = 0; j < n; ++j) source += pieces[pick(rng)];
        auto parsed = parse_condition(source);
        if (parsed.ok()) {
            auto ctx = gen.random_context();
            (void)eval_condition(parsed.value(), ctx);
        }
    }
}

TEST_CASE("apply_mapping projects asserted attributes") {
    AttributeMapping mapping;
    mapping.entries.push_back(
        {"google.subject", parse_condition("assertion.arn").value()});
    AssertionContext ctx = arn_context("arn:aws:sts::1:assumed-role/r/sa");

    auto out = apply_mapping(mapping, ctx);
    REQUIRE(out.ok());
    CHECK(out.value().size() == 1);
    CHECK(out.value().at("google.subject") ==
          "arn:aws:sts::1:assumed-role/r/sa");

    SUBCASE("literal mappings work on any context") {
        mapping.entries.push_back(
            {"x", parse_condition("'fixed'").value()});
        auto with_literal = apply_mapping(mapping, AssertionContext{});
        REQUIRE_FALSE(with_literal.ok());  // arn still missing
        mapping.entries.erase(mapping.entries.begin());
        auto only_literal = apply_mapping(mapping, AssertionContext{});
        REQUIRE(only_literal.ok());
        CHECK(only_literal.value().at("x") == "fixed");
    }

    SUBCASE("missing path surfaces MissingAttribute") {
        mapping.entries.push_back(
            {"y", parse_condition("assertion.gone").value()});
        auto failed = apply_mapping(mapping, ctx);
        REQUIRE_FALSE(failed.ok());
        CHECK(failed.error().code == Errc::MissingAttribute);
    }
}

TEST_CASE("string-equals condition is a conjunction of exact matches") {
    jwt::JwtClaims claims;
    claims.issuer = "https://idp.local";
    claims.subject = "system:serviceaccount:pegasus:pegasus-sa";
    claims.audience = {"sts.amazonaws.com"};
    claims.expires_at = 2;
    claims.issued_at = 1;
    claims.jwt_id = "j";
    claims.extra["kubernetes"] = {{"namespace", "pegasus"}};

    StringEqualsCondition cond;
    cond.required["container.googleapis.com/...:sub"] =
        "system:serviceaccount:pegasus:pegasus-sa";
    cond.required["container.googleapis.com/...:aud"] = "sts.amazonaws.com";
    CHECK(eval_string_equals(cond, claims));

    SUBCASE("empty condition map is vacuously true") {
        CHECK(eval_string_equals(StringEqualsCondition{}, claims));
    }

    SUBCASE("any non-matching key flips the result") {
        cond.required["kubernetes.namespace"] = "pegasus";
        CHECK(eval_string_equals(cond, claims));
        cond.required["kubernetes.namespace"] = "other";
        CHECK_FALSE(eval_string_equals(cond, claims));
    }

    SUBCASE("missing claim fails closed") {
        cond.required["host:nonexistent"] = "whatever";
        CHECK_FALSE(eval_string_equals(cond, claims));
    }

    SUBCASE("subject comparison is exact, not prefix") {
        claims.subject = "system:serviceaccount:pegasus:pegasus-sa-extra";
        CHECK_FALSE(eval_string_equals(cond, claims));
    }
}

TEST_CASE("string escapes survive print/parse") {
    auto expr = parse_condition(R"(assertion.sub == 'it\'s \\ here')");
    REQUIRE(expr.ok());
    const auto* eq = std::get_if<Equality>(&expr.value()->node);
    REQUIRE(eq != nullptr);
    const auto* lit = std::get_if<StringLiteral>(&eq->rhs->node);
    REQUIRE(lit != nullptr);
    CHECK(lit->value == "it's \\ here");
    auto reparsed = parse_condition(print_expr(expr.value()));
    REQUIRE(reparsed.ok());
    CHECK(expr_equal(expr.value(), reparsed.value()));
}
