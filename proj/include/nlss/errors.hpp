#pragma once

#include <stdexcept>
#include <string>

namespace nlss {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct NonFinite : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace nlss
