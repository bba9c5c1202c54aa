#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semask/geo.hpp"
#include "semask/object.hpp"
#include "semask/rng.hpp"

namespace semask {

/// Vocabulary for one kind of business in the synthetic corpus.
struct CategoryProfile {
  std::string kind;
  std::vector<std::string> name_first;
  std::vector<std::string> name_second;
  std::vector<std::string> categories;
  /// Generic praise shared by every business of this kind.
  std::vector<std::string> common_phrases;
  /// Distinctive amenities; each object draws three of them.
  std::vector<std::string> features;
  int open_hour = 9;
  int close_hour = 17;
};

/// The built-in profiles: cafe, sports bar, auto repair, sushi, pizzeria,
/// bakery, gym, bookstore, hair salon, pet store.
const std::vector<CategoryProfile>& default_profiles();

/// n objects with locations uniform in bbox, each drawn from one profile.
/// A pure function of its arguments: same inputs, byte-identical output.
std::vector<GeoTextualObject> generate_synthetic_corpus(std::uint64_t seed, std::size_t n, const GeoRect& bbox,
                                                        const std::vector<CategoryProfile>& profiles = default_profiles(),
                                                        const std::string& city = "Synthville");


}  // namespace semask
