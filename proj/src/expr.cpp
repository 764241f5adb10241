#include "steam/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

namespace steam::expr {

namespace {

struct Token {
    enum class Type : std::uint8_t {
        Number,
        Identifier,
        Plus, Minus, Star, Slash,
        Lt, Le, Gt, Ge, Eq, Ne,
        And, Or, Not,
        LParen, RParen, Comma,
        End,
    };

    Type type;
    double number{0.0};
    std::string_view text;
    std::size_t offset{0};
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& current() const { return current_; }

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        current_.offset = pos_;
        if (pos_ >= src_.size()) {
            current_.type = Token::Type::End;
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return;
        }
        if (is_ident_start(c)) {
            lex_identifier();
            return;
        }
        switch (c) {
            case '+': single(Token::Type::Plus); return;
            case '-': single(Token::Type::Minus); return;
            case '*': single(Token::Type::Star); return;
            case '/': single(Token::Type::Slash); return;
            case '(': single(Token::Type::LParen); return;
            case ')': single(Token::Type::RParen); return;
            case ',': single(Token::Type::Comma); return;
            case '<':
                if (peek(1) == '=') { pair(Token::Type::Le); } else { single(Token::Type::Lt); }
                return;
            case '>':
                if (peek(1) == '=') { pair(Token::Type::Ge); } else { single(Token::Type::Gt); }
                return;
            case '=':
                if (peek(1) == '=') { pair(Token::Type::Eq); return; }
                throw SyntaxError("unexpected '='", pos_);
            case '!':
                if (peek(1) == '=') { pair(Token::Type::Ne); return; }
                throw SyntaxError("unexpected '!'", pos_);
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
        }
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void single(Token::Type t) {
        current_.type = t;
        current_.text = src_.substr(pos_, 1);
        ++pos_;
    }

    void pair(Token::Type t) {
        current_.type = t;
        current_.text = src_.substr(pos_, 2);
        pos_ += 2;
    }

    void lex_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        std::string_view text = src_.substr(start, pos_ - start);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw SyntaxError("malformed number", start);
        }
        current_.type = Token::Type::Number;
        current_.number = v;
        current_.text = text;
    }

    void lex_identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        std::string_view text = src_.substr(start, pos_ - start);
        if (text == "and") {
            current_.type = Token::Type::And;
        } else if (text == "or") {
            current_.type = Token::Type::Or;
        } else if (text == "not") {
            current_.type = Token::Type::Not;
        } else {
            current_.type = Token::Type::Identifier;
        }
        current_.text = text;
    }

    std::string_view src_;
    std::size_t pos_{0};
    Token current_;
};

NodePtr make_literal(double v) {
    auto n = std::make_unique<Node>();
    n->type = Node::Type::Literal;
    n->literal = v;
    return n;
}

NodePtr make_identifier(std::string name) {
    auto n = std::make_unique<Node>();
    n->type = Node::Type::Identifier;
    n->name = std::move(name);
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr operand) {
    auto n = std::make_unique<Node>();
    n->type = Node::Type::Unary;
    n->unary_op = op;
    n->lhs = std::move(operand);
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_unique<Node>();
    n->type = Node::Type::Binary;
    n->binary_op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

// Grammar, one function per precedence level:
//   or   := and ('or' and)*
//   and  := cmp ('and' cmp)*
//   cmp  := add [cmpop add]          (a second cmpop is a syntax error)
//   add  := mul (('+'|'-') mul)*
//   mul  := unary (('*'|'/') unary)*
//   unary:= ('-'|'not') unary | primary
class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) {}

    NodePtr parse() {
        NodePtr root = parse_or();
        if (lexer_.current().type != Token::Type::End) {
            throw SyntaxError("unexpected trailing input", lexer_.current().offset);
        }
        return root;
    }

private:
    NodePtr parse_or() {
        NodePtr lhs = parse_and();
        while (lexer_.current().type == Token::Type::Or) {
            lexer_.advance();
            lhs = make_binary(BinaryOp::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    NodePtr parse_and() {
        NodePtr lhs = parse_cmp();
        while (lexer_.current().type == Token::Type::And) {
            lexer_.advance();
            lhs = make_binary(BinaryOp::And, std::move(lhs), parse_cmp());
        }
        return lhs;
    }

    static bool cmp_op(Token::Type t, BinaryOp& out) {
        switch (t) {
            case Token::Type::Lt: out = BinaryOp::Lt; return true;
            case Token::Type::Le: out = BinaryOp::Le; return true;
            case Token::Type::Gt: out = BinaryOp::Gt; return true;
            case Token::Type::Ge: out = BinaryOp::Ge; return true;
            case Token::Type::Eq: out = BinaryOp::Eq; return true;
            case Token::Type::Ne: out = BinaryOp::Ne; return true;
            default: return false;
        }
    }

    NodePtr parse_cmp() {
        NodePtr lhs = parse_add();
        BinaryOp op;
        if (!cmp_op(lexer_.current().type, op)) return lhs;
        lexer_.advance();
        NodePtr rhs = parse_add();
        BinaryOp second;
        if (cmp_op(lexer_.current().type, second)) {
            throw SyntaxError("comparisons are non-associative", lexer_.current().offset);
        }
        return make_binary(op, std::move(lhs), std::move(rhs));
    }

    NodePtr parse_add() {
        NodePtr lhs = parse_mul();
        for (;;) {
            Token::Type t = lexer_.current().type;
            if (t == Token::Type::Plus) {
                lexer_.advance();
                lhs = make_binary(BinaryOp::Add, std::move(lhs), parse_mul());
            } else if (t == Token::Type::Minus) {
                lexer_.advance();
                lhs = make_binary(BinaryOp::Sub, std::move(lhs), parse_mul());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_mul() {
        NodePtr lhs = parse_unary();
        for (;;) {
            Token::Type t = lexer_.current().type;
            if (t == Token::Type::Star) {
                lexer_.advance();
                lhs = make_binary(BinaryOp::Mul, std::move(lhs), parse_unary());
            } else if (t == Token::Type::Slash) {
                lexer_.advance();
                lhs = make_binary(BinaryOp::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (lexer_.current().type == Token::Type::Minus) {
            lexer_.advance();
            return make_unary(UnaryOp::Neg, parse_unary());
        }
        if (lexer_.current().type == Token::Type::Not) {
            lexer_.advance();
            return make_unary(UnaryOp::Not, parse_unary());
        }
        return parse_primary();
    }

    NodePtr parse_primary() {
        const Token& tok = lexer_.current();
        switch (tok.type) {
            case Token::Type::Number: {
                double v = tok.number;
                lexer_.advance();
                return make_literal(v);
            }
            case Token::Type::Identifier: {
                std::string name(tok.text);
                std::size_t name_offset = tok.offset;
                lexer_.advance();
                if (lexer_.current().type == Token::Type::LParen) {
                    return parse_call(std::move(name), name_offset);
                }
                return make_identifier(std::move(name));
            }
            case Token::Type::LParen: {
                lexer_.advance();
                NodePtr inner = parse_or();
                if (lexer_.current().type != Token::Type::RParen) {
                    throw SyntaxError("expected ')'", lexer_.current().offset);
                }
                lexer_.advance();
                return inner;
            }
            default:
                throw SyntaxError("expected a value", tok.offset);
        }
    }

    NodePtr parse_call(std::string name, std::size_t name_offset) {
        Builtin fn;
        if (name == "max") {
            fn = Builtin::Max;
        } else if (name == "min") {
            fn = Builtin::Min;
        } else if (name == "abs") {
            fn = Builtin::Abs;
        } else {
            throw SyntaxError("unknown function '" + name + "'", name_offset);
        }
        lexer_.advance();  // consume '('
        std::vector<NodePtr> args;
        if (lexer_.current().type != Token::Type::RParen) {
            args.push_back(parse_or());
            while (lexer_.current().type == Token::Type::Comma) {
                lexer_.advance();
                args.push_back(parse_or());
            }
        }
        if (lexer_.current().type != Token::Type::RParen) {
            throw SyntaxError("expected ')'", lexer_.current().offset);
        }
        lexer_.advance();

        if (fn == Builtin::Abs && args.size() != 1) {
            throw ArityError("abs takes exactly one argument", name_offset);
        }
        if (fn != Builtin::Abs && args.empty()) {
            throw ArityError(name + " needs at least one argument", name_offset);
        }
        auto n = std::make_unique<Node>();
        n->type = Node::Type::Call;
        n->builtin = fn;
        n->args = std::move(args);
        return n;
    }

    Lexer lexer_;
};

EvalValue type_error(EvalStats* stats) {
    if (stats) ++stats->type_errors;
    return EvalValue::missing();
}

EvalValue finite_or_overflow(double v, EvalStats* stats) {
    if (!std::isfinite(v)) {
        if (stats) ++stats->overflow;
        return EvalValue::missing();
    }
    return EvalValue::number(v);
}

EvalValue eval_node(const Node& n, const EvalEnv& env, EvalStats* stats);

EvalValue eval_arithmetic(BinaryOp op, const Node& n, const EvalEnv& env, EvalStats* stats) {
    EvalValue a = eval_node(*n.lhs, env, stats);
    EvalValue b = eval_node(*n.rhs, env, stats);
    if (a.is_missing() || b.is_missing()) return EvalValue::missing();
    if (!a.is_number() || !b.is_number()) return type_error(stats);
    switch (op) {
        case BinaryOp::Add: return finite_or_overflow(a.num() + b.num(), stats);
        case BinaryOp::Sub: return finite_or_overflow(a.num() - b.num(), stats);
        case BinaryOp::Mul: return finite_or_overflow(a.num() * b.num(), stats);
        case BinaryOp::Div:
            if (b.num() == 0.0) {
                if (stats) ++stats->divide_by_zero;
                return EvalValue::missing();
            }
            return finite_or_overflow(a.num() / b.num(), stats);
        default: return EvalValue::missing();
    }
}

EvalValue eval_comparison(BinaryOp op, const Node& n, const EvalEnv& env, EvalStats* stats) {
    EvalValue a = eval_node(*n.lhs, env, stats);
    EvalValue b = eval_node(*n.rhs, env, stats);
    if (a.is_missing() || b.is_missing()) return EvalValue::missing();
    if (!a.is_number() || !b.is_number()) return type_error(stats);
    bool r = false;
    switch (op) {
        case BinaryOp::Lt: r = a.num() < b.num(); break;
        case BinaryOp::Le: r = a.num() <= b.num(); break;
        case BinaryOp::Gt: r = a.num() > b.num(); break;
        case BinaryOp::Ge: r = a.num() >= b.num(); break;
        case BinaryOp::Eq: r = a.num() == b.num(); break;
        case BinaryOp::Ne: r = a.num() != b.num(); break;
        default: break;
    }
    return EvalValue::boolean(r);
}

// Three-valued and/or: a non-Missing operand that decides the result wins
// (short-circuit left-to-right), otherwise Missing propagates. Non-boolean
// operands are type errors.
EvalValue eval_logical(BinaryOp op, const Node& n, const EvalEnv& env, EvalStats* stats) {
    EvalValue a = eval_node(*n.lhs, env, stats);
    bool want = (op == BinaryOp::Or);  // operand value that decides the result
    if (a.is_boolean() && a.truth() == want) return EvalValue::boolean(want);
    if (!a.is_boolean() && !a.is_missing()) return type_error(stats);

    EvalValue b = eval_node(*n.rhs, env, stats);
    if (b.is_boolean() && b.truth() == want) return EvalValue::boolean(want);
    if (!b.is_boolean() && !b.is_missing()) return type_error(stats);

    if (a.is_missing() || b.is_missing()) return EvalValue::missing();
    return EvalValue::boolean(!want);
}

EvalValue eval_call(const Node& n, const EvalEnv& env, EvalStats* stats) {
    if (n.builtin == Builtin::Abs) {
        EvalValue v = eval_node(*n.args[0], env, stats);
        if (v.is_missing()) return EvalValue::missing();
        if (!v.is_number()) return type_error(stats);
        return EvalValue::number(std::fabs(v.num()));
    }
    bool want_max = (n.builtin == Builtin::Max);
    double best = 0.0;
    bool first = true;
    for (const auto& arg : n.args) {
        EvalValue v = eval_node(*arg, env, stats);
        if (v.is_missing()) return EvalValue::missing();
        if (!v.is_number()) return type_error(stats);
        if (first || (want_max ? v.num() > best : v.num() < best)) best = v.num();
        first = false;
    }
    return EvalValue::number(best);
}

EvalValue eval_node(const Node& n, const EvalEnv& env, EvalStats* stats) {
    switch (n.type) {
        case Node::Type::Literal:
            return EvalValue::number(n.literal);
        case Node::Type::Identifier: {
            const Value* v = env.lookup(n.name);
            return v ? EvalValue::from(*v) : EvalValue::missing();
        }
        case Node::Type::Unary: {
            EvalValue v = eval_node(*n.lhs, env, stats);
            if (v.is_missing()) return EvalValue::missing();
            if (n.unary_op == UnaryOp::Neg) {
                if (!v.is_number()) return type_error(stats);
                return EvalValue::number(-v.num());
            }
            if (!v.is_boolean()) return type_error(stats);
            return EvalValue::boolean(!v.truth());
        }
        case Node::Type::Binary:
            switch (n.binary_op) {
                case BinaryOp::Add:
                case BinaryOp::Sub:
                case BinaryOp::Mul:
                case BinaryOp::Div:
                    return eval_arithmetic(n.binary_op, n, env, stats);
                case BinaryOp::And:
                case BinaryOp::Or:
                    return eval_logical(n.binary_op, n, env, stats);
                default:
                    return eval_comparison(n.binary_op, n, env, stats);
            }
        case Node::Type::Call:
            return eval_call(n, env, stats);
    }
    return EvalValue::missing();
}

const char* binary_op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
    }
    return "?";
}

void print_node(const Node& n, std::string& out) {
    switch (n.type) {
        case Node::Type::Literal: {
            char buf[32];
            auto r = std::to_chars(buf, buf + sizeof(buf), n.literal);
            out.append(buf, r.ptr);
            return;
        }
        case Node::Type::Identifier:
            out += n.name;
            return;
        case Node::Type::Unary:
            out += '(';
            out += (n.unary_op == UnaryOp::Neg) ? "-" : "not ";
            print_node(*n.lhs, out);
            out += ')';
            return;
        case Node::Type::Binary:
            out += '(';
            print_node(*n.lhs, out);
            out += ' ';
            out += binary_op_text(n.binary_op);
            out += ' ';
            print_node(*n.rhs, out);
            out += ')';
            return;
        case Node::Type::Call:
            switch (n.builtin) {
                case Builtin::Max: out += "max"; break;
                case Builtin::Min: out += "min"; break;
                case Builtin::Abs: out += "abs"; break;
            }
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                print_node(*n.args[i], out);
            }
            out += ')';
            return;
    }
}

void collect_node(const Node& n, std::set<std::string>& out) {
    switch (n.type) {
        case Node::Type::Identifier: out.insert(n.name); return;
        case Node::Type::Unary: collect_node(*n.lhs, out); return;
        case Node::Type::Binary:
            collect_node(*n.lhs, out);
            collect_node(*n.rhs, out);
            return;
        case Node::Type::Call:
            for (const auto& a : n.args) collect_node(*a, out);
            return;
        default: return;
    }
}

bool nodes_equal(const Node* a, const Node* b) {
    if (a == nullptr || b == nullptr) return a == b;
    if (a->type != b->type) return false;
    switch (a->type) {
        case Node::Type::Literal: return a->literal == b->literal;
        case Node::Type::Identifier: return a->name == b->name;
        case Node::Type::Unary:
            return a->unary_op == b->unary_op && nodes_equal(a->lhs.get(), b->lhs.get());
        case Node::Type::Binary:
            return a->binary_op == b->binary_op && nodes_equal(a->lhs.get(), b->lhs.get()) &&
                   nodes_equal(a->rhs.get(), b->rhs.get());
        case Node::Type::Call: {
            if (a->builtin != b->builtin || a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i) {
                if (!nodes_equal(a->args[i].get(), b->args[i].get())) return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace

Expression Expression::parse(std::string_view source) {
    Parser parser(source);
    Expression out;
    out.root_ = parser.parse();
    out.source_ = std::string(source);
    return out;
}

EvalValue Expression::evaluate(const EvalEnv& env, EvalStats* stats) const {
    if (!root_) return EvalValue::missing();
    return eval_node(*root_, env, stats);
}

std::string Expression::print() const {
    std::string out;
    if (root_) print_node(*root_, out);
    return out;
}

void Expression::collect_identifiers(std::set<std::string>& out) const {
    if (root_) collect_node(*root_, out);
}

bool Expression::same_shape(const Expression& other) const {
    return nodes_equal(root_.get(), other.root_.get());
}

}  // namespace steam::expr
