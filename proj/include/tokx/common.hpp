#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tokx {

inline constexpr const char *kToolName = "tokx";
inline constexpr const char *kToolVersion = "0.1.0";

// Base class for all toolkit errors. Subcommands catch this at the top
// level and turn it into a nonzero exit with the message on stderr.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Invalid byte sequence in an input file. Carries the file and the byte
// offset of the first offending byte.
class EncodingError : public Error {
  public:
    EncodingError(std::string file, std::size_t byte_offset)
        : Error("invalid UTF-8 in '" + file + "' at byte offset " + std::to_string(byte_offset)),
          file_(std::move(file)), byte_offset_(byte_offset) {}

    const std::string &file() const { return file_; }
    std::size_t byte_offset() const { return byte_offset_; }

  private:
    std::string file_;
    std::size_t byte_offset_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// Precondition/shape violations on tokenizers, configs and datasets.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

} // namespace tokx
