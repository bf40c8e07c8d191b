#pragma once

// Arithmetic on numeric config fields, so angles can be written as they are
// usually stated ("3*pi/4", "pi/2 - 1e-3", "1/sqrt(2)", "1e8/10^2.5").
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'pi' | 'e' | 'sqrt(' expr ')' | '(' expr ')'

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qlm::io {

class ExprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class ExprParser {
public:
    explicit ExprParser(std::string_view s) : s_(s) {}

    double parse()
    {
        const double v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        if (!std::isfinite(v)) fail("value is not finite");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const
    {
        throw ExprError("cannot evaluate '" + std::string(s_) + "': " + why);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool eat_word(std::string_view w)
    {
        skip();
        if (s_.substr(pos_, w.size()) != w) return false;
        const std::size_t end = pos_ + w.size();
        if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) return false;
        pos_ = end;
        return true;
    }

    double expr()
    {
        double v = term();
        for (;;) {
            if (eat('+'))
                v += term();
            else if (eat('-'))
                v -= term();
            else
                return v;
        }
    }

    double term()
    {
        double v = unary();
        for (;;) {
            if (eat('*'))
                v *= unary();
            else if (eat('/'))
                v /= unary();
            else
                return v;
        }
    }

    double unary()
    {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }

    double power()
    {
        const double base = atom();
        if (eat('^')) return std::pow(base, unary());
        return base;
    }

    double atom()
    {
        skip();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (eat_word("pi")) return std::numbers::pi;
        if (eat_word("sqrt")) {
            if (!eat('(')) fail("expected '(' after sqrt");
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            if (v < 0.0) fail("sqrt of a negative number");
            return std::sqrt(v);
        }
        if (eat_word("e")) return std::numbers::e;
        return number();
    }

    double number()
    {
        skip();
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr == first) fail(pos_ < s_.size() ? "expected a number" : "unexpected end");
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline double evaluate(std::string_view text) { return detail::ExprParser(text).parse(); }

}  // namespace qlm::io
