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

#include "fedauth/condition.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace fedauth::cond {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
    Ident,
    String,
    LParen,
    RParen,
    Dot,
    Bang,
    AndAnd,
    OrOr,
    EqEq,
    BangEq,
    End,
};

struct Token {
    Tok kind;
    std::string text;  // ident name or string value
    size_t offset;
};

std::string tok_desc(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::String: return "string literal";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Dot: return "'.'";
        case Tok::Bang: return "'!'";
        case Tok::AndAnd: return "'&&'";
        case Tok::OrOr: return "'||'";
        case Tok::EqEq: return "'=='";
        case Tok::BangEq: return "'!='";
        case Tok::End: return "end of input";
    }
    return "?";
}

ConditionExpr make_expr(Expr e) {
    return std::make_shared<const Expr>(std::move(e));
}

Error syntax_error(size_t offset, const std::string& expected,
                   const std::string& found) {
    std::ostringstream msg;
    msg << "offset " << offset << ": expected " << expected << ", found "
        << found;
    return Error(Errc::SyntaxError, msg.str());
}

Result<std::vector<Token>> lex(std::string_view src) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(') {
            out.push_back({Tok::LParen, "", i++});
        } else if (c == ')') {
            out.push_back({Tok::RParen, "", i++});
        } else if (c == '.') {
            out.push_back({Tok::Dot, "", i++});
        } else if (c == '&') {
            if (i + 1 >= src.size() || src[i + 1] != '&') {
                return syntax_error(i, "'&&'", "'&'");
            }
            out.push_back({Tok::AndAnd, "", i});
            i += 2;
        } else if (c == '|') {
            if (i + 1 >= src.size() || src[i + 1] != '|') {
                return syntax_error(i, "'||'", "'|'");
            }
            out.push_back({Tok::OrOr, "", i});
            i += 2;
        } else if (c == '=') {
            if (i + 1 >= src.size() || src[i + 1] != '=') {
                return syntax_error(i, "'=='", "'='");
            }
            out.push_back({Tok::EqEq, "", i});
            i += 2;
        } else if (c == '!') {
            if (i + 1 < src.size() && src[i + 1] == '=') {
                out.push_back({Tok::BangEq, "", i});
                i += 2;
            } else {
                out.push_back({Tok::Bang, "", i++});
            }
        } else if (c == '\'' || c == '"') {
            char quote = c;
            size_t start = i++;
            std::string value;
            bool closed = false;
            while (i < src.size()) {
                char d = src[i];
                if (d == '\\') {
                    if (i + 1 >= src.size()) break;
                    char esc = src[i + 1];
                    if (esc != '\\' && esc != '\'' && esc != '"') {
                        return syntax_error(i, "escape of \\, ' or \"",
                                            std::string("'\\") + esc + "'");
                    }
                    value.push_back(esc);
                    i += 2;
                } else if (d == quote) {
                    closed = true;
                    ++i;
                    break;
                } else {
                    value.push_back(d);
                    ++i;
                }
            }
            if (!closed) {
                return syntax_error(start, "closing quote", "end of input");
            }
            out.push_back({Tok::String, std::move(value), start});
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) ||
                    src[i] == '_')) {
                ++i;
            }
            out.push_back(
                {Tok::Ident, std::string(src.substr(start, i - start)), start});
        } else {
            return syntax_error(i, "expression token",
                                "'" + std::string(1, c) + "'");
        }
    }
    out.push_back({Tok::End, "", src.size()});
    return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Result<ConditionExpr> run() {
        auto expr = parse_or(0);
        if (!expr.ok()) return expr;
        if (peek().kind != Tok::End) {
            return syntax_error(peek().offset, "end of input",
                                tok_desc(peek().kind));
        }
        return expr;
    }

  private:
    const Token& peek(size_t ahead = 0) const {
        size_t idx = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[idx];
    }
    const Token& advance() { return toks_[pos_++]; }

    static Result<ConditionExpr> depth_exceeded(size_t offset) {
        return Error(Errc::DepthExceeded,
                     "offset " + std::to_string(offset) +
                         ": expression nests deeper than " +
                         std::to_string(kMaxDepth) + " levels");
    }

    Result<ConditionExpr> parse_or(int depth) {
        if (depth > kMaxDepth) return depth_exceeded(peek().offset);
        auto lhs = parse_and(depth);
        if (!lhs.ok()) return lhs;
        ConditionExpr node = lhs.value();
        while (peek().kind == Tok::OrOr) {
            advance();
            auto rhs = parse_and(depth);
            if (!rhs.ok()) return rhs;
            node = make_expr(
                Expr{BoolOp{node, rhs.value(), BoolOpKind::Or}});
        }
        return node;
    }

    Result<ConditionExpr> parse_and(int depth) {
        auto lhs = parse_unary(depth);
        if (!lhs.ok()) return lhs;
        ConditionExpr node = lhs.value();
        while (peek().kind == Tok::AndAnd) {
            advance();
            auto rhs = parse_unary(depth);
            if (!rhs.ok()) return rhs;
            node = make_expr(
                Expr{BoolOp{node, rhs.value(), BoolOpKind::And}});
        }
        return node;
    }

    Result<ConditionExpr> parse_unary(int depth) {
        if (depth > kMaxDepth) return depth_exceeded(peek().offset);
        if (peek().kind == Tok::Bang) {
            advance();
            auto inner = parse_unary(depth + 1);
            if (!inner.ok()) return inner;
            return make_expr(Expr{Not{inner.value()}});
        }
        return parse_comparison(depth);
    }

    Result<ConditionExpr> parse_comparison(int depth) {
        auto lhs = parse_operand(depth);
        if (!lhs.ok()) return lhs;
        if (peek().kind == Tok::EqEq || peek().kind == Tok::BangEq) {
            bool negated = advance().kind == Tok::BangEq;
            auto rhs = parse_operand(depth);
            if (!rhs.ok()) return rhs;
            return make_expr(
                Expr{Equality{lhs.value(), rhs.value(), negated}});
        }
        return lhs;
    }

    Result<ConditionExpr> parse_operand(int depth) {
        auto base = parse_primary(depth);
        if (!base.ok()) return base;
        ConditionExpr node = base.value();
        while (peek().kind == Tok::Dot) {
            advance();
            if (peek().kind != Tok::Ident) {
                return syntax_error(peek().offset, "method name",
                                    tok_desc(peek().kind));
            }
            Token name = advance();
            Method method;
            if (name.text == "endsWith") {
                method = Method::EndsWith;
            } else if (name.text == "startsWith") {
                method = Method::StartsWith;
            } else if (name.text == "contains") {
                method = Method::Contains;
            } else {
                return syntax_error(
                    name.offset,
                    "one of: 'endsWith', 'startsWith', 'contains'",
                    "'" + name.text + "'");
            }
            if (peek().kind != Tok::LParen) {
                return syntax_error(peek().offset, "'('",
                                    tok_desc(peek().kind));
            }
            advance();
            if (peek().kind != Tok::String) {
                return syntax_error(peek().offset, "string literal",
                                    tok_desc(peek().kind));
            }
            Token arg = advance();
            if (peek().kind != Tok::RParen) {
                return syntax_error(peek().offset, "')'",
                                    tok_desc(peek().kind));
            }
            advance();
            node = make_expr(Expr{MethodCall{node, method, arg.text}});
        }
        return node;
    }

    Result<ConditionExpr> parse_primary(int depth) {
        const Token& tok = peek();
        if (tok.kind == Tok::String) {
            advance();
            return make_expr(Expr{StringLiteral{tok.text}});
        }
        if (tok.kind == Tok::LParen) {
            advance();
            auto inner = parse_or(depth + 1);
            if (!inner.ok()) return inner;
            if (peek().kind != Tok::RParen) {
                return syntax_error(peek().offset, "')'",
                                    tok_desc(peek().kind));
            }
            advance();
            return inner;
        }
        if (tok.kind == Tok::Ident) {
            if (tok.text != "assertion") {
                return syntax_error(tok.offset, "'assertion'",
                                    "'" + tok.text + "'");
            }
            advance();
            AttributePath path;
            // Consume '.ident' segments; a segment followed by '(' belongs
            // to a method call, not the path.
            while (peek().kind == Tok::Dot && peek(1).kind == Tok::Ident &&
                   peek(2).kind != Tok::LParen) {
                advance();
                path.parts.push_back(advance().text);
            }
            if (path.parts.empty()) {
                return syntax_error(
                    peek().offset,
                    "'.attribute' after 'assertion'",
                    tok_desc(peek().kind));
            }
            return make_expr(Expr{std::move(path)});
        }
        return syntax_error(
            tok.offset, "one of: string literal, 'assertion', '(', '!'",
            tok_desc(tok.kind));
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

int expr_depth(const ConditionExpr& e) {
    return std::visit(
        [](const auto& node) -> int {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, StringLiteral> ||
                          std::is_same_v<T, AttributePath>) {
                return 1;
            } else if constexpr (std::is_same_v<T, MethodCall>) {
                return 1 + expr_depth(node.receiver);
            } else if constexpr (std::is_same_v<T, Equality>) {
                return 1 + std::max(expr_depth(node.lhs), expr_depth(node.rhs));
            } else if constexpr (std::is_same_v<T, BoolOp>) {
                return 1 + std::max(expr_depth(node.lhs), expr_depth(node.rhs));
            } else {
                return 1 + expr_depth(node.inner);
            }
        },
        e->node);
}

// ---------------------------------------------------------------------------
// Printer. Levels: Or=1, And=2, Not=3, Equality=4, postfix/primary=5. A node
// printed where a higher level is required gets parenthesized, which is what
// makes parse(print(e)) == e hold for every tree.

int node_level(const Expr& e) {
    return std::visit(
        [](const auto& node) -> int {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, BoolOp>) {
                return node.op == BoolOpKind::Or ? 1 : 2;
            } else if constexpr (std::is_same_v<T, Not>) {
                return 3;
            } else if constexpr (std::is_same_v<T, Equality>) {
                return 4;
            } else {
                return 5;
            }
        },
        e.node);
}

std::string quote_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

void print_node(const ConditionExpr& e, int required_level, std::string& out) {
    bool parens = node_level(*e) < required_level;
    if (parens) out.push_back('(');
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, StringLiteral>) {
                out += quote_string(node.value);
            } else if constexpr (std::is_same_v<T, AttributePath>) {
                out += "assertion";
                for (const auto& p : node.parts) {
                    out.push_back('.');
                    out += p;
                }
            } else if constexpr (std::is_same_v<T, MethodCall>) {
                print_node(node.receiver, 5, out);
                out.push_back('.');
                out += method_name(node.method);
                out.push_back('(');
                out += quote_string(node.argument);
                out.push_back(')');
            } else if constexpr (std::is_same_v<T, Equality>) {
                print_node(node.lhs, 5, out);
                out += node.negated ? " != " : " == ";
                print_node(node.rhs, 5, out);
            } else if constexpr (std::is_same_v<T, BoolOp>) {
                int level = node.op == BoolOpKind::Or ? 1 : 2;
                print_node(node.lhs, level, out);
                out += node.op == BoolOpKind::Or ? " || " : " && ";
                print_node(node.rhs, level + 1, out);
            } else {  // Not
                out.push_back('!');
                print_node(node.inner, 3, out);
            }
        },
        e->node);
    if (parens) out.push_back(')');
}

// ---------------------------------------------------------------------------
// Evaluator

using Value = std::variant<std::string, bool>;

Result<Value> eval(const ConditionExpr& e, const AssertionContext& ctx) {
    return std::visit(
        [&](const auto& node) -> Result<Value> {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, StringLiteral>) {
                return Value{node.value};
            } else if constexpr (std::is_same_v<T, AttributePath>) {
                const std::string path = node.joined();
                const std::string* v = ctx.find(path);
                if (v == nullptr) {
                    return Error(Errc::MissingAttribute,
                                 "assertion." + path);
                }
                return Value{*v};
            } else if constexpr (std::is_same_v<T, MethodCall>) {
                auto recv = eval(node.receiver, ctx);
                if (!recv.ok()) return recv.error();
                const auto* s = std::get_if<std::string>(&recv.value());
                if (s == nullptr) {
                    return Error(Errc::TypeMismatch,
                                 "method receiver must be a string");
                }
                const std::string& arg = node.argument;
                bool result = false;
                switch (node.method) {
                    case Method::EndsWith:
                        result = s->size() >= arg.size() &&
                                 s->compare(s->size() - arg.size(),
                                            arg.size(), arg) == 0;
                        break;
                    case Method::StartsWith:
                        result = s->compare(0, arg.size(), arg) == 0 &&
                                 s->size() >= arg.size();
                        break;
                    case Method::Contains:
                        result = s->find(arg) != std::string::npos;
                        break;
                }
                return Value{result};
            } else if constexpr (std::is_same_v<T, Equality>) {
                auto lhs = eval(node.lhs, ctx);
                if (!lhs.ok()) return lhs.error();
                auto rhs = eval(node.rhs, ctx);
                if (!rhs.ok()) return rhs.error();
                const auto* ls = std::get_if<std::string>(&lhs.value());
                const auto* rs = std::get_if<std::string>(&rhs.value());
                if (ls == nullptr || rs == nullptr) {
                    return Error(Errc::TypeMismatch,
                                 "equality operands must be strings");
                }
                bool eq = *ls == *rs;
                return Value{node.negated ? !eq : eq};
            } else if constexpr (std::is_same_v<T, BoolOp>) {
                auto lhs = eval(node.lhs, ctx);
                if (!lhs.ok()) return lhs.error();
                const auto* lb = std::get_if<bool>(&lhs.value());
                if (lb == nullptr) {
                    return Error(Errc::TypeMismatch,
                                 "boolean operator needs boolean operands");
                }
                // short-circuit: the unevaluated side can reference missing
                // attributes without failing
                if (node.op == BoolOpKind::And && !*lb) return Value{false};
                if (node.op == BoolOpKind::Or && *lb) return Value{true};
                auto rhs = eval(node.rhs, ctx);
                if (!rhs.ok()) return rhs.error();
                const auto* rb = std::get_if<bool>(&rhs.value());
                if (rb == nullptr) {
                    return Error(Errc::TypeMismatch,
                                 "boolean operator needs boolean operands");
                }
                return Value{*rb};
            } else {  // Not
                auto inner = eval(node.inner, ctx);
                if (!inner.ok()) return inner.error();
                const auto* b = std::get_if<bool>(&inner.value());
                if (b == nullptr) {
                    return Error(Errc::TypeMismatch,
                                 "'!' needs a boolean operand");
                }
                return Value{!*b};
            }
        },
        e->node);
}

void flatten_json(const nlohmann::json& node, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
    if (node.is_string()) {
        out[prefix] = node.get<std::string>();
    } else if (node.is_number_integer()) {
        out[prefix] = std::to_string(node.get<int64_t>());
    } else if (node.is_boolean()) {
        out[prefix] = node.get<bool>() ? "true" : "false";
    } else if (node.is_object()) {
        for (const auto& [k, v] : node.items()) {
            flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
        }
    }
    // arrays and null have no attribute form; skipped
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::EndsWith: return "endsWith";
        case Method::StartsWith: return "startsWith";
        case Method::Contains: return "contains";
    }
    return "endsWith";
}

std::string AttributePath::joined() const {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.push_back('.');
        out += parts[i];
    }
    return out;
}

bool expr_equal(const ConditionExpr& a, const ConditionExpr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& na) -> bool {
            using T = std::decay_t<decltype(na)>;
            const auto& nb = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, StringLiteral>) {
                return na.value == nb.value;
            } else if constexpr (std::is_same_v<T, AttributePath>) {
                return na.parts == nb.parts;
            } else if constexpr (std::is_same_v<T, MethodCall>) {
                return na.method == nb.method && na.argument == nb.argument &&
                       expr_equal(na.receiver, nb.receiver);
            } else if constexpr (std::is_same_v<T, Equality>) {
                return na.negated == nb.negated &&
                       expr_equal(na.lhs, nb.lhs) && expr_equal(na.rhs, nb.rhs);
            } else if constexpr (std::is_same_v<T, BoolOp>) {
                return na.op == nb.op && expr_equal(na.lhs, nb.lhs) &&
                       expr_equal(na.rhs, nb.rhs);
            } else {
                return expr_equal(na.inner, nb.inner);
            }
        },
        a->node);
}

std::string print_expr(const ConditionExpr& expr) {
    std::string out;
    print_node(expr, 1, out);
    return out;
}

Result<ConditionExpr> parse_condition(std::string_view source) {
    if (source.size() > kMaxSourceLength) {
        return Error(Errc::SyntaxError,
                     "offset " + std::to_string(kMaxSourceLength) +
                         ": source exceeds " +
                         std::to_string(kMaxSourceLength) + " bytes");
    }
    auto tokens = lex(source);
    if (!tokens.ok()) return tokens.error();
    Parser parser(std::move(tokens).value());
    auto expr = parser.run();
    if (!expr.ok()) return expr;
    if (expr_depth(expr.value()) > kMaxDepth) {
        return Error(Errc::DepthExceeded,
                     "expression tree deeper than " +
                         std::to_string(kMaxDepth) + " levels");
    }
    return expr;
}

AssertionContext AssertionContext::from_claims(const jwt::JwtClaims& claims) {
    AssertionContext ctx;
    if (!claims.subject.empty()) ctx.set("sub", claims.subject);
    if (!claims.issuer.empty()) ctx.set("iss", claims.issuer);
    if (!claims.audience.empty()) ctx.set("aud", claims.audience.front());
    if (!claims.jwt_id.empty()) ctx.set("jti", claims.jwt_id);
    std::map<std::string, std::string> flat;
    flatten_json(claims.extra, "", flat);
    for (auto& [k, v] : flat) ctx.set(k, v);
    return ctx;
}

Result<bool> eval_condition(const ConditionExpr& expr,
                            const AssertionContext& ctx) {
    auto value = eval(expr, ctx);
    if (!value.ok()) return value.error();
    const auto* b = std::get_if<bool>(&value.value());
    if (b == nullptr) {
        return Error(Errc::TypeMismatch,
                     "condition must evaluate to a boolean");
    }
    return *b;
}

const AttributeMapping::Entry* AttributeMapping::find(
    std::string_view target) const {
    for (const auto& e : entries) {
        if (e.target == target) return &e;
    }
    return nullptr;
}

Result<std::map<std::string, std::string>> apply_mapping(
    const AttributeMapping& mapping, const AssertionContext& ctx) {
    std::map<std::string, std::string> out;
    for (const auto& entry : mapping.entries) {
        auto value = eval(entry.value, ctx);
        if (!value.ok()) return value.error();
        const auto* s = std::get_if<std::string>(&value.value());
        if (s == nullptr) {
            return Error(Errc::TypeMismatch,
                         "mapping for " + entry.target +
                             " must produce a string");
        }
        out[entry.target] = *s;
    }
    return out;
}

bool eval_string_equals(const StringEqualsCondition& cond,
                        const jwt::JwtClaims& claims) {
    for (const auto& [key, required] : cond.required) {
        // "<issuer-host>:sub" → "sub"
        auto colon = key.rfind(':');
        std::string claim =
            colon == std::string::npos ? key : key.substr(colon + 1);

        if (claim == "sub") {
            if (claims.subject != required) return false;
        } else if (claim == "iss") {
            if (claims.issuer != required) return false;
        } else if (claim == "jti") {
            if (claims.jwt_id != required) return false;
        } else if (claim == "aud") {
            if (std::find(claims.audience.begin(), claims.audience.end(),
                          required) == claims.audience.end()) {
                return false;
            }
        } else {
            // extra claims, addressable by dotted path
            std::map<std::string, std::string> flat;
            flatten_json(claims.extra, "", flat);
            auto it = flat.find(claim);
            if (it == flat.end() || it->second != required) return false;
        }
    }
    return true;
}

}  // namespace fedauth::cond
