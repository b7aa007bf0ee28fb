#include "gmix/history.hpp"

#include <string>

#include "gmix/error.hpp"

namespace gmix {

Alphabet Alphabet::finite(std::size_t size) {
  if (size < 2) throw DomainError("alphabet", "finite alphabet needs at least 2 symbols");
  return Alphabet(size);
}

void History::validate(const Alphabet& alphabet) const {
  for (Symbol s : prefix_)
    if (!alphabet.contains(s))
      throw DomainError("alphabet", "history symbol " + std::to_string(s) + " outside alphabet");
  if (!alphabet.contains(tail_))
    throw DomainError("alphabet", "history tail symbol " + std::to_string(tail_) + " outside alphabet");
}

History make_history(std::vector<Symbol> prefix, Symbol tail_symbol, const Alphabet& alphabet) {
  History h(std::move(prefix), tail_symbol);
  h.validate(alphabet);
  return h;
}

}  // namespace gmix
