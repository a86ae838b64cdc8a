#include "vnls/expr.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

namespace vnls {

struct Expression::Node {
    enum class Op { Const, Mu, Neg, Add, Sub, Mul, Div, Exp } op;
    cplx value{};
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, cplx value = {}) {
    return std::make_shared<const Expression::Node>(Expression::Node{op, value, std::move(lhs), std::move(rhs)});
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream os;
        os << "expression \"" << s_ << "\": " << what << " at position " << pos_;
        throw Error(ErrorKind::Config, os.str());
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) {
                n = make(Op::Add, n, term());
            } else if (accept('-')) {
                n = make(Op::Sub, n, term());
            } else {
                return n;
            }
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) {
                n = make(Op::Mul, n, unary());
            } else if (accept('/')) {
                n = make(Op::Div, n, unary());
            } else {
                return n;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double value = 0.0;
            const char* first = s_.data() + pos_;
            const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), value);
            if (ec != std::errc()) fail("malformed number");
            pos_ += static_cast<std::size_t>(ptr - first);
            return make(Op::Const, nullptr, nullptr, value);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string word = s_.substr(start, pos_ - start);
            if (word == "mu") return make(Op::Mu);
            if (word == "i") return make(Op::Const, nullptr, nullptr, cplx(0.0, 1.0));
            if (word == "exp") {
                if (!accept('(')) fail("expected '(' after exp");
                NodePtr arg = expr();
                if (!accept(')')) fail("expected ')'");
                return make(Op::Exp, arg);
            }
            pos_ = start;
            fail("unknown identifier '" + word + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

cplx eval(const Expression::Node& n, cplx mu) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Mu: return mu;
        case Op::Neg: return -eval(*n.lhs, mu);
        case Op::Add: return eval(*n.lhs, mu) + eval(*n.rhs, mu);
        case Op::Sub: return eval(*n.lhs, mu) - eval(*n.rhs, mu);
        case Op::Mul: return eval(*n.lhs, mu) * eval(*n.rhs, mu);
        case Op::Div: return eval(*n.lhs, mu) / eval(*n.rhs, mu);
        case Op::Exp: return std::exp(eval(*n.lhs, mu));
    }
    return {};
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(e.text_).parse();
    return e;
}

cplx Expression::operator()(cplx mu) const {
    return eval(*root_, mu);
}

}  // namespace vnls
