#include "secagg/thfhe_kat.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "secagg/error.hpp"

namespace secagg {

KatFile read_kat(std::istream& in) {
  KatFile file;
  bool have_secret = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    auto bad = [&](const char* why) {
      fail(Errc::ParseError, "KAT line " + std::to_string(lineno) + ": " + why);
    };
    if (first == "secret") {
      if (!(ls >> file.secret)) bad("expected secret value");
      have_secret = true;
      continue;
    }
    KatVector v;
    std::string arrow, c1, c2;
    try {
      v.m = std::stoll(first);
    } catch (const std::exception&) {
      bad("expected plaintext");
    }
    if (!(ls >> v.r >> arrow >> c1 >> c2) || arrow != "->") bad("expected 'm r -> c1 c2'");
    v.c1 = Point::from_bytes(from_hex(c1));
    v.c2 = Point::from_bytes(from_hex(c2));
    file.vectors.push_back(v);
  }
  if (!have_secret) fail(Errc::ParseError, "KAT file has no 'secret' line");
  return file;
}

void write_kat(std::ostream& out, const KatFile& file) {
  out << "secret " << file.secret << '\n';
  for (const auto& v : file.vectors)
    out << v.m << ' ' << v.r << " -> " << to_hex(v.c1.bytes()) << ' ' << to_hex(v.c2.bytes())
        << '\n';
}

}  // namespace secagg
