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

// Attribute-condition expression language used by workload-identity provider
// configurations, plus the flat StringEquals evaluator used by role trust
// policies.
//
// Grammar (informal):
//
//   expr       := or
//   or         := and ( '||' and )*
//   and        := unary ( '&&' unary )*
//   unary      := '!' unary | comparison
//   comparison := operand ( ('==' | '!=') operand )?
//   operand    := primary ( '.' method '(' string ')' )*
//   primary    := string | path | '(' expr ')'
//   path       := 'assertion' ( '.' ident )+
//   method     := 'endsWith' | 'startsWith' | 'contains'
//   string     := '...' or "..." with \' \" \\ escapes
//
// Expressions are string- or bool-typed; typing is enforced at evaluation
// (TypeMismatch). '&&' and '||' short-circuit, so an unevaluated side never
// raises MissingAttribute. No arithmetic, no regex.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fedauth/error.hpp"
#include "fedauth/jwt.hpp"

namespace fedauth::cond {

inline constexpr size_t kMaxSourceLength = 4096;
inline constexpr int kMaxDepth = 32;

enum class Method { EndsWith, StartsWith, Contains };
enum class BoolOpKind { And, Or };

std::string_view method_name(Method m);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct StringLiteral {
    std::string value;
};

/// Dotted identifier chain rooted at `assertion`; `parts` excludes the root.
struct AttributePath {
    std::vector<std::string> parts;

    [[nodiscard]] std::string joined() const;
};

struct MethodCall {
    ExprPtr receiver;
    Method method;
    std::string argument;
};

struct Equality {
    ExprPtr lhs;
    ExprPtr rhs;
    bool negated = false;  // true for !=
};

struct BoolOp {
    ExprPtr lhs;
    ExprPtr rhs;
    BoolOpKind op;
};

struct Not {
    ExprPtr inner;
};

struct Expr {
    std::variant<StringLiteral, AttributePath, MethodCall, Equality, BoolOp,
                 Not>
        node;
};

using ConditionExpr = ExprPtr;

bool expr_equal(const ConditionExpr& a, const ConditionExpr& b);

/// Serializes an AST to source form. Parentheses are emitted from structure
/// and precedence, so parse(print(e)) == e for every tree.
std::string print_expr(const ConditionExpr& expr);

/// Parses expression source. Syntax errors carry the byte offset and the
/// expected-token set in the message; nesting beyond kMaxDepth is rejected.
Result<ConditionExpr> parse_condition(std::string_view source);

/// Asserted identity attributes visible to conditions: dotted path → string.
/// A missing path is an error condition, never an empty string.
class AssertionContext {
  public:
    AssertionContext() = default;
    explicit AssertionContext(std::map<std::string, std::string> attrs)
        : attrs_(std::move(attrs)) {}

    void set(std::string path, std::string value) {
        attrs_[std::move(path)] = std::move(value);
    }
    [[nodiscard]] const std::string* find(const std::string& path) const {
        auto it = attrs_.find(path);
        return it == attrs_.end() ? nullptr : &it->second;
    }
    [[nodiscard]] const std::map<std::string, std::string>& attributes() const {
        return attrs_;
    }

    /// Flattens verified claims into condition attributes: sub, iss, aud
    /// (first entry), jti, and every string/number leaf of the extra claims
    /// under its dotted path.
    static AssertionContext from_claims(const jwt::JwtClaims& claims);

  private:
    std::map<std::string, std::string> attrs_;
};

Result<bool> eval_condition(const ConditionExpr& expr,
                            const AssertionContext& ctx);

/// Projection of asserted attributes onto target-side names. Values are
/// restricted to string-producing forms (attribute path or literal).
struct AttributeMapping {
    struct Entry {
        std::string target;  // e.g. "google.subject"
        ConditionExpr value;
    };
    std::vector<Entry> entries;  // targets unique, order preserved

    [[nodiscard]] const Entry* find(std::string_view target) const;
};

Result<std::map<std::string, std::string>> apply_mapping(
    const AttributeMapping& mapping, const AssertionContext& ctx);

/// Flat exact-match condition from role trust policies. Keys may carry an
/// issuer-host prefix ("<host>:sub"); the claim name is the segment after
/// the last ':'.
struct StringEqualsCondition {
    std::map<std::string, std::string> required;
};

/// Conjunction of exact string matches; a missing claim fails the match
/// (fail-closed). The aud key matches any entry of the audience list.
bool eval_string_equals(const StringEqualsCondition& cond,
                        const jwt::JwtClaims& claims);

}  // namespace fedauth::cond
