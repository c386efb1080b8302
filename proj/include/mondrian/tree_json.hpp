#pragma once

#include <string>

#include "mondrian/tree.hpp"

namespace mondrian {

/// Tree as a JSON document: {lifetime, root, nodes:[{id, birth, cut_time?,
/// dim?, loc?, left?, right?, box:{lower:[...], upper:[...]}}]}. Doubles are
/// written with shortest-round-trip encoding, so the round trip is lossless.
std::string tree_to_json(const MondrianTree& tree);

MondrianTree tree_from_json(const std::string& text);

}  // namespace mondrian
