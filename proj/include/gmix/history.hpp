#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gmix {

using Symbol = std::uint32_t;

/// The alphabet of a chain: either {0, ..., size-1} or the nonnegative
/// integers.
class Alphabet {
 public:
  static Alphabet finite(std::size_t size);
  static Alphabet nonneg_integers() { return Alphabet(0); }

  bool is_finite() const { return size_ != 0; }
  /// Number of symbols; only meaningful for finite alphabets.
  std::size_t size() const { return size_; }
  bool contains(Symbol a) const { return !is_finite() || a < size_; }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  explicit Alphabet(std::size_t size) : size_(size) {}
  std::size_t size_;  // 0 encodes the countable case
};

/// A semi-infinite past x = (x_{-1}, x_{-2}, ...), stored as a finite prefix
/// (most recent first) followed by a constant tail.
class History {
 public:
  History() = default;
  History(std::vector<Symbol> prefix, Symbol tail_symbol)
      : prefix_(std::move(prefix)), tail_(tail_symbol) {}

  /// Symbol at depth d >= 1, i.e. x_{-d}.
  Symbol lookup(std::size_t depth) const {
    return depth <= prefix_.size() ? prefix_[depth - 1] : tail_;
  }

  const std::vector<Symbol>& prefix() const { return prefix_; }
  Symbol tail_symbol() const { return tail_; }

  /// Throws DomainError if any symbol lies outside `alphabet`.
  void validate(const Alphabet& alphabet) const;

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<Symbol> prefix_;
  Symbol tail_ = 0;
};

/// Checked constructor.
History make_history(std::vector<Symbol> prefix, Symbol tail_symbol, const Alphabet& alphabet);

/// The past seen by a chain after emitting `recent` (oldest first) on top of
/// its starting history. Cheap to copy; does not own its data.
class ContextView {
 public:
  ContextView(const History& start, std::span<const Symbol> recent)
      : start_(&start), recent_(recent) {}
  explicit ContextView(const History& start) : start_(&start) {}

  Symbol at(std::size_t depth) const {
    return depth <= recent_.size() ? recent_[recent_.size() - depth]
                                   : start_->lookup(depth - recent_.size());
  }

  /// Depth up to which the context is stored explicitly; every deeper
  /// coordinate equals `tail()`.
  std::size_t explicit_depth() const { return recent_.size() + start_->prefix().size(); }
  Symbol tail() const { return start_->tail_symbol(); }

  std::span<const Symbol> recent() const { return recent_; }
  const History& start() const { return *start_; }

 private:
  const History* start_;
  std::span<const Symbol> recent_;
};

}  // namespace gmix
