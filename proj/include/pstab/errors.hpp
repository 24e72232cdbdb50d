#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pstab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifierError : public Error {
public:
    explicit UnknownIdentifierError(const std::string& name)
        : Error("unknown identifier '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Raised when an expression is evaluated outside its domain.
class DomainError : public Error {
public:
    DomainError(const std::string& what, const std::string& subexpr)
        : Error(what + " in " + subexpr), subexpr_(subexpr) {}
    const std::string& subexpression() const { return subexpr_; }

private:
    std::string subexpr_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Internal inconsistency, e.g. a construction that should succeed did not.
class InternalError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace pstab
