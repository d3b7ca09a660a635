#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>

namespace robustapi {

/// Small built-in subtype table for the library types the shipped rules
/// mention (collections, Gson, Android activities, exceptions).
bool is_subtype(std::string_view sub, std::string_view super);

/// The direct supertype of `type` in the built-in table, or "" at the root.
std::string_view direct_supertype(std::string_view type);

/// Maps (receiver type, method) to the return type of the call. A "*"
/// receiver entry applies when the receiver type is unknown or has no entry
/// of its own.
class ReturnTypeTable {
 public:
  /// Parses lines of the form `Type.method -> ReturnType`; `#` starts a
  /// comment. Throws std::runtime_error naming the first malformed line.
  static ReturnTypeTable load(std::istream& in);
  static const ReturnTypeTable& builtin();

  void add(std::string type, std::string method, std::string result);
  /// "" when no entry applies.
  std::string lookup(std::string_view type, std::string_view method) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::string, std::less<>> entries_;
};

}  // namespace robustapi
