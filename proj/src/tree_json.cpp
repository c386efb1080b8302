#include "mondrian/tree_json.hpp"

#include <json.hpp>

namespace mondrian {

using nlohmann::json;

std::string tree_to_json(const MondrianTree& tree) {
  json nodes = json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const MondrianNode& n = tree.nodes[i];
    json rec{{"id", i},
             {"birth", n.birth_time},
             {"box", {{"lower", n.box.lower}, {"upper", n.box.upper}}}};
    if (!n.is_leaf()) {
      rec["cut_time"] = n.cut_time;
      rec["dim"] = n.cut_dim;
      rec["loc"] = n.cut_loc;
      rec["left"] = n.left;
      rec["right"] = n.right;
    }
    nodes.push_back(std::move(rec));
  }
  json doc{{"lifetime", tree.lifetime}, {"root", tree.root}, {"nodes", std::move(nodes)}};
  return doc.dump(2);
}

MondrianTree tree_from_json(const std::string& text) {
  const json doc = json::parse(text);
  MondrianTree tree;
  tree.lifetime = doc.at("lifetime").get<double>();
  tree.root = doc.at("root").get<std::int32_t>();
  const json& nodes = doc.at("nodes");
  tree.nodes.resize(nodes.size());
  for (const json& rec : nodes) {
    const auto id = rec.at("id").get<std::size_t>();
    MondrianNode& n = tree.nodes.at(id);
    n.birth_time = rec.at("birth").get<double>();
    n.box.lower = rec.at("box").at("lower").get<std::vector<double>>();
    n.box.upper = rec.at("box").at("upper").get<std::vector<double>>();
    if (rec.contains("cut_time")) {
      n.cut_time = rec.at("cut_time").get<double>();
      n.cut_dim = rec.at("dim").get<std::int32_t>();
      n.cut_loc = rec.at("loc").get<double>();
      n.left = rec.at("left").get<std::int32_t>();
      n.right = rec.at("right").get<std::int32_t>();
    }
  }
  return tree;
}

}  // namespace mondrian
