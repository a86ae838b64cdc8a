#pragma once

#include "vnls/types.hpp"

#include <memory>
#include <string>

namespace vnls {

/// Arithmetic over the spectral variable: real literals, `mu`, `i`, + - * /, unary minus,
/// parentheses and exp(...).
class Expression {
public:
    struct Node;

    /// Throws Error(Config) naming the offending position.
    static Expression parse(const std::string& text);

    cplx operator()(cplx mu) const;
    const std::string& text() const { return text_; }

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace vnls
