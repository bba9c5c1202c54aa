#include "semask/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

namespace semask {

namespace {

const std::array<const char*, 16> kStreets = {"Oak",    "Maple", "Main",   "Market", "Walnut", "Elm",
                                              "Cedar",  "Pine",  "Lake",   "Hill",   "River",  "Park",
                                              "Church", "Broad", "Spruce", "Chestnut"};
const std::array<const char*, 5> kStreetSuffix = {"St", "Ave", "Blvd", "Rd", "Ln"};
const std::array<const char*, 7> kDays = {"Monday", "Tuesday", "Wednesday", "Thursday",
                                          "Friday", "Saturday", "Sunday"};

// Tip templates; {f} is a distinctive feature, {c} a common phrase.
const std::array<const char*, 6> kFeatureTips = {"Love the {f}!",
                                                 "The {f} here is amazing",
                                                 "Best {f} in town",
                                                 "Really impressed by the {f}",
                                                 "Come back every week for the {f}",
                                                 "Ask about the {f}"};
const std::array<const char*, 3> kCommonTips = {"{c}, would recommend", "Solid spot with {c}", "{c} as always"};

std::string fill_slot(std::string tmpl, std::string_view key, const std::string& value) {
  const auto p = tmpl.find(key);
  if (p != std::string::npos) tmpl.replace(p, key.size(), value);
  return tmpl;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

const std::vector<CategoryProfile>& default_profiles() {
  static const std::vector<CategoryProfile> profiles = {
      {"cafe",
       {"Bean", "Roast", "Daily", "Velvet", "Copper", "Morning", "Corner", "Ember"},
       {"Coffee", "Cafe", "Espresso Bar", "Roasters"},
       {"Coffee & Tea", "Cafes", "Breakfast & Brunch"},
       {"great coffee", "friendly baristas", "cozy seating"},
       {"oat milk lattes", "pour over coffee", "fresh croissants", "free wifi", "quiet study space", "cold brew",
        "avocado toast", "outdoor patio", "latte art", "matcha drinks", "vegan pastries", "dog friendly seating"},
       7,
       18},
      {"bar",
       {"Touchdown", "Rusty", "Golden", "Union", "Half Time", "Brick", "Lucky", "Iron"},
       {"Tavern", "Sports Bar", "Pub", "Taproom"},
       {"Bars", "Sports Bars", "American (Traditional)", "Pubs"},
       {"cold beer", "fun crowd", "good vibes"},
       {"chicken wings", "football on big screens", "craft beer on tap", "trivia night", "pool tables",
        "happy hour deals", "live music", "loaded nachos", "karaoke", "rooftop deck", "darts", "late night kitchen"},
       11,
       23},
      {"auto repair",
       {"Precision", "Main Street", "Honest", "Pit Stop", "Gearhead", "Allied", "Torque", "Summit"},
       {"Auto Repair", "Automotive", "Garage", "Tire & Service"},
       {"Automotive", "Auto Repair", "Oil Change Stations", "Tires"},
       {"fair prices", "helpful mechanics", "clean waiting room"},
       {"brake repair", "oil change", "tire rotation", "honest estimates", "quick turnaround", "transmission work",
        "free inspection", "loaner cars", "wheel alignment", "battery replacement", "engine diagnostics",
        "shuttle service"},
       8,
       18},
      {"sushi",
       {"Sakura", "Koi", "Hana", "Umi", "Kaze", "Tsuki", "Yuzu", "Kumo"},
       {"Sushi", "Sushi Bar", "Japanese Kitchen", "Ramen House"},
       {"Japanese", "Sushi Bars", "Restaurants", "Ramen"},
       {"fresh fish", "attentive service", "calm atmosphere"},
       {"omakase", "fresh sashimi", "spicy tuna roll", "rich ramen broth", "sake list", "bento lunch", "tempura",
        "chef counter", "miso soup", "udon noodles", "happy hour sushi", "vegetarian rolls"},
       11,
       22},
      {"pizzeria",
       {"Tony's", "Brooklyn", "Napoli", "Stone", "Crust", "Mama's", "Vesuvio", "Slice"},
       {"Pizza", "Pizzeria", "Pizza Kitchen", "Pie Co"},
       {"Pizza", "Italian", "Restaurants"},
       {"tasty pizza", "big portions", "quick service"},
       {"wood fired oven", "thin crust", "garlic knots", "gluten free crust", "late night delivery", "deep dish",
        "house made mozzarella", "calzones", "slices to go", "family platters", "craft sodas", "tiramisu"},
       11,
       23},
      {"bakery",
       {"Golden", "Flour", "Sweet", "Rise", "Butter", "Hearth", "Sugar", "Crumb"},
       {"Bakery", "Bakehouse", "Patisserie", "Bread Co"},
       {"Bakeries", "Desserts", "Coffee & Tea"},
       {"fresh bread", "kind staff", "sweet treats"},
       {"sourdough loaves", "cinnamon rolls", "custom cakes", "macarons", "gluten free options",
        "early morning hours", "fruit tarts", "bagels", "cupcakes", "baguettes", "kouign amann", "birthday cakes"},
       6,
       15},
      {"gym",
       {"Iron", "Peak", "Pulse", "Core", "Forge", "Titan", "Motion", "Elevate"},
       {"Fitness", "Gym", "Athletic Club", "Strength Studio"},
       {"Fitness & Instruction", "Gyms", "Trainers"},
       {"good equipment", "motivating staff", "friendly members"},
       {"personal trainers", "yoga classes", "clean locker rooms", "sauna", "open around the clock", "spin classes",
        "free weights", "lap pool", "boxing classes", "childcare room", "smoothie bar", "no contract memberships"},
       5,
       23},
      {"bookstore",
       {"Folio", "Chapter", "Ink", "Willow", "Lantern", "Quill", "Attic", "Harbor"},
       {"Books", "Bookshop", "Booksellers", "Book Nook"},
       {"Bookstores", "Books, Mags, Music & Video", "Shopping"},
       {"great selection", "helpful staff", "relaxing browse"},
       {"used books", "rare first editions", "reading nook", "author events", "kids section", "comic books",
        "vinyl records", "staff picks", "board games", "poetry readings", "local authors", "gift wrapping"},
       10,
       20},
      {"hair salon",
       {"Shear", "Mane", "Luxe", "Bloom", "Gloss", "Razor", "Velvet", "Studio"},
       {"Salon", "Hair Studio", "Barbershop", "Hair Lounge"},
       {"Hair Salons", "Beauty & Spas", "Barbers"},
       {"skilled stylists", "relaxing visit", "fair prices"},
       {"balayage", "beard trims", "walk ins welcome", "hair coloring", "keratin treatment", "hot towel shave",
        "kids haircuts", "bridal styling", "curly hair specialists", "scalp massage", "eyebrow threading",
        "online booking"},
       9,
       19},
      {"pet store",
       {"Happy", "Paws", "Furry", "Wag", "Whisker", "Tail", "Buddy", "Feather"},
       {"Pets", "Pet Supply", "Pet Shop", "Pet Market"},
       {"Pet Stores", "Pets", "Pet Groomers"},
       {"caring staff", "well stocked shelves", "pet friendly vibe"},
       {"dog grooming", "organic pet food", "aquarium supplies", "adoption events", "cat toys", "bird seed",
        "self wash station", "nail trims", "reptile supplies", "treat bar", "puppy training classes",
        "hamster cages"},
       9,
       20},
  };
  return profiles;
}

std::vector<GeoTextualObject> generate_synthetic_corpus(std::uint64_t seed, std::size_t n, const GeoRect& bbox,
                                                        const std::vector<CategoryProfile>& profiles,
                                                        const std::string& city) {
  if (profiles.empty()) throw std::invalid_argument("at least one category profile is required");
  SeededRng rng(seed);
  std::vector<GeoTextualObject> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& prof = profiles[rng.below(profiles.size())];
    const double lat = rng.uniform(bbox.min_lat(), bbox.max_lat());
    const double lon = rng.uniform(bbox.min_lon(), bbox.max_lon());
    const std::string name =
        prof.name_first[rng.below(prof.name_first.size())] + " " + prof.name_second[rng.below(prof.name_second.size())];
    auto obj = GeoTextualObject::make(fmt::format("syn-{}-{:05d}", seed, i), name, GeoPoint(lat, lon));

    auto& attrs = obj.attributes;
    attrs.set("address", Text{fmt::format("{} {} {}", 10 + rng.below(1990), kStreets[rng.below(kStreets.size())],
                                          kStreetSuffix[rng.below(kStreetSuffix.size())])});
    attrs.set("city", Text{city});
    attrs.set("stars", Number{1.0 + 0.5 * static_cast<double>(rng.below(9))});

    // Three distinct features, each mentioned twice; common phrases once.
    std::vector<std::size_t> picks;
    while (picks.size() < std::min<std::size_t>(3, prof.features.size())) {
      const auto f = rng.below(prof.features.size());
      if (std::find(picks.begin(), picks.end(), f) == picks.end()) picks.push_back(f);
    }
    std::vector<std::string> tips;
    for (std::size_t r = 0; r < 2; ++r) {
      for (auto f : picks) tips.push_back(fill_slot(kFeatureTips[rng.below(kFeatureTips.size())], "{f}", prof.features[f]));
    }
    const std::size_t n_common = 1 + rng.below(2);
    for (std::size_t c = 0; c < n_common; ++c) {
      tips.push_back(capitalize(fill_slot(kCommonTips[rng.below(kCommonTips.size())], "{c}",
                                     prof.common_phrases[rng.below(prof.common_phrases.size())])));
    }
    // Deterministic shuffle (Fisher-Yates).
    for (std::size_t k = tips.size(); k > 1; --k) std::swap(tips[k - 1], tips[rng.below(k)]);

    attrs.set("tip_count", Number{static_cast<double>(tips.size())});
    attrs.set("is_open", Number{rng.uniform() < 0.9 ? 1.0 : 0.0});

    Category cats;
    const std::size_t n_cats = 2 + rng.below(prof.categories.size() - 1);
    for (std::size_t c = 0; c < n_cats && c < prof.categories.size(); ++c) cats.values.push_back(prof.categories[c]);
    attrs.set("categories", std::move(cats));

    Hours hours;
    const int open = prof.open_hour + static_cast<int>(rng.below(2));
    const int close = prof.close_hour - static_cast<int>(rng.below(2));
    const std::size_t closed_day = rng.below(10);  // >= 7 means open every day
    for (std::size_t d = 0; d < kDays.size(); ++d) {
      if (d == closed_day) continue;
      hours.days.emplace_back(kDays[d], fmt::format("{}:0-{}:0", open, close));
    }
    attrs.set("hours", std::move(hours));

    obj.tips = std::move(tips);
    out.push_back(std::move(obj));
  }
  return out;
}

}  // namespace semask
