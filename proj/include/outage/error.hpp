#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace outage {

/// Bad input, bad configuration, or a violated precondition the caller can fix.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rejected line in one of the CSV inputs. `row` is 1-based and counts the header.
class ParseError : public UserError {
 public:
  ParseError(std::string file, std::size_t row, std::string field, const std::string& what)
      : UserError(file + ": row " + std::to_string(row) + (field.empty() ? "" : ", field '" + field + "'") +
                  ": " + what),
        file_(std::move(file)),
        row_(row),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t row_;
  std::string field_;
};

}  // namespace outage
