#include "robustapi/types.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "embedded_data.hpp"

namespace robustapi {

namespace {

const std::unordered_map<std::string_view, std::string_view>& supertypes() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      // collections
      {"ArrayList", "List"},
      {"LinkedList", "List"},
      {"Vector", "List"},
      {"Stack", "Vector"},
      {"CopyOnWriteArrayList", "List"},
      {"AbstractList", "List"},
      {"List", "Collection"},
      {"Set", "Collection"},
      {"HashSet", "Set"},
      {"TreeSet", "Set"},
      {"LinkedHashSet", "Set"},
      {"HashMap", "Map"},
      {"TreeMap", "Map"},
      {"LinkedHashMap", "HashMap"},
      {"ConcurrentHashMap", "Map"},
      {"Hashtable", "Map"},
      {"SortedMap", "Map"},
      {"NavigableMap", "Map"},
      {"ConcurrentMap", "Map"},
      {"ListIterator", "Iterator"},
      // Gson
      {"JsonObject", "JsonElement"},
      {"JsonArray", "JsonElement"},
      {"JsonPrimitive", "JsonElement"},
      {"JsonNull", "JsonElement"},
      // Android
      {"AppCompatActivity", "FragmentActivity"},
      {"FragmentActivity", "ComponentActivity"},
      {"ComponentActivity", "Activity"},
      {"ListActivity", "Activity"},
      {"PreferenceActivity", "ListActivity"},
      {"Activity", "Context"},
      {"SQLiteCursor", "Cursor"},
      // exceptions
      {"Exception", "Throwable"},
      {"Error", "Throwable"},
      {"IOException", "Exception"},
      {"FileNotFoundException", "IOException"},
      {"UnsupportedEncodingException", "IOException"},
      {"EOFException", "IOException"},
      {"ClosedChannelException", "IOException"},
      {"NonWritableChannelException", "IllegalStateException"},
      {"MalformedURLException", "IOException"},
      {"UncheckedIOException", "RuntimeException"},
      {"RuntimeException", "Exception"},
      {"IllegalArgumentException", "RuntimeException"},
      {"IllegalStateException", "RuntimeException"},
      {"NullPointerException", "RuntimeException"},
      {"IndexOutOfBoundsException", "RuntimeException"},
      {"ArrayIndexOutOfBoundsException", "IndexOutOfBoundsException"},
      {"StringIndexOutOfBoundsException", "IndexOutOfBoundsException"},
      {"NoSuchElementException", "RuntimeException"},
      {"UnsupportedOperationException", "RuntimeException"},
      {"ClassCastException", "RuntimeException"},
      {"NumberFormatException", "IllegalArgumentException"},
      {"SQLException", "Exception"},
      {"SQLiteException", "RuntimeException"},
      {"JsonParseException", "RuntimeException"},
      {"JsonSyntaxException", "JsonParseException"},
      {"Resources.NotFoundException", "RuntimeException"},
      {"NotFoundException", "RuntimeException"},
      {"NameNotFoundException", "Exception"},
      {"GeneralSecurityException", "Exception"},
      {"InvalidKeyException", "KeyException"},
      {"KeyException", "GeneralSecurityException"},
      {"NoSuchAlgorithmException", "GeneralSecurityException"},
      {"NoSuchPaddingException", "GeneralSecurityException"},
      {"InvalidAlgorithmParameterException", "GeneralSecurityException"},
      {"BadPaddingException", "GeneralSecurityException"},
      {"IllegalBlockSizeException", "GeneralSecurityException"},
  };
  return table;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view direct_supertype(std::string_view type) {
  const auto& table = supertypes();
  auto it = table.find(type);
  return it == table.end() ? std::string_view{} : it->second;
}

bool is_subtype(std::string_view sub, std::string_view super) {
  for (std::string_view t = sub; !t.empty(); t = direct_supertype(t)) {
    if (t == super) return true;
  }
  return false;
}

ReturnTypeTable ReturnTypeTable::load(std::istream& in) {
  ReturnTypeTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto arrow = body.find("->");
    auto dot = body.rfind('.', arrow);
    if (arrow == std::string::npos || dot == std::string::npos || dot == 0) {
      throw std::runtime_error("return-type table line " + std::to_string(line_no) +
                               ": expected 'Type.method -> ReturnType'");
    }
    std::string type = trim(std::string_view(body).substr(0, dot));
    std::string method = trim(std::string_view(body).substr(dot + 1, arrow - dot - 1));
    std::string result = trim(std::string_view(body).substr(arrow + 2));
    if (type.empty() || method.empty() || result.empty()) {
      throw std::runtime_error("return-type table line " + std::to_string(line_no) +
                               ": empty component");
    }
    table.add(std::move(type), std::move(method), std::move(result));
  }
  return table;
}

const ReturnTypeTable& ReturnTypeTable::builtin() {
  static const ReturnTypeTable table = [] {
    std::istringstream in{std::string(embedded::kReturnTypes)};
    return load(in);
  }();
  return table;
}

void ReturnTypeTable::add(std::string type, std::string method, std::string result) {
  entries_[{std::move(type), std::move(method)}] = std::move(result);
}

std::string ReturnTypeTable::lookup(std::string_view type, std::string_view method) const {
  for (std::string_view t = type; !t.empty(); t = direct_supertype(t)) {
    auto it = entries_.find(std::make_pair(std::string(t), std::string(method)));
    if (it != entries_.end()) return it->second;
  }
  auto it = entries_.find(std::make_pair(std::string("*"), std::string(method)));
  return it == entries_.end() ? std::string{} : it->second;
}

}  // namespace robustapi
