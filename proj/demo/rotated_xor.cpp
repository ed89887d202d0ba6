// Rotated XOR and an oblique linear boundary. With tight clusters the rotated
// XOR stays easy for a tree (one rotated coordinate already separates the
// classes); the 45 degree line is where an axis-aligned tree runs out of
// leaves and the neural rules seeded by it rotate their hyperplanes instead.
//
//   demo_rotated_xor [angle-degrees] [svg-out]
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "nre/nre.hpp"

int main(int argc, char** argv) {
  const double angle = argc > 1 ? std::atof(argv[1]) : 30.0;
  const auto train = nre::gen_rotated_xor(4000, angle, 0.15, 1);
  const auto test = nre::gen_rotated_xor(4000, angle, 0.15, 2);

  nre::TrainConfig cfg;
  cfg.max_depth = 4;
  cfg.deep = true;
  cfg.epochs = 2000;

  nre::TrainHooks hooks;
  hooks.on_epoch = [](const nre::EpochStats& s) {
    if (s.epoch % 250 == 0) {
      std::cout << fmt::format("epoch {:>5}  loss {:.4f}  train error {:.2f}%\n", s.epoch, s.train_loss,
                               100 * s.train_error);
    }
  };
  const auto result = nre::nre_train(train, cfg, hooks);
  const auto& model = result.model;

  std::size_t tree_wrong = 0;
  const auto z = nre::standardize_apply(test, model.standardization);
  for (std::size_t i = 0; i < z.rows(); ++i) tree_wrong += model.source_tree.predict(z.row(i)) != z.label(i);

  std::cout << fmt::format("\nXOR rotated by {} degrees, depth-{} tree\n", angle, cfg.max_depth);
  std::cout << model.source_tree.pretty(train.feature_names());
  std::cout << fmt::format("\ntree test error: {:.2f}%\n", 100.0 * tree_wrong / z.rows());
  std::cout << fmt::format("NRE test error:  {:.2f}% ({} rules)\n", 100 * nre::evaluate(model, test),
                           model.rules.size());

  const auto line = nre::gen_linear_separable(2000, 45.0, 0.05, 1);
  std::cout << "\n45 degree line, training error by leaf budget:\n";
  for (std::size_t leaves : {2, 3, 5, 8}) {
    const auto t = nre::build_tree(line, nre::TreeOptions{10, 1, leaves});
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < line.rows(); ++i) wrong += t.predict(line.row(i)) != line.label(i);
    std::cout << fmt::format("  tree, {} leaves: {:.2f}%\n", t.leaf_count(), 100.0 * wrong / line.rows());
  }
  nre::TrainConfig lcfg;
  lcfg.max_depth = 2;
  lcfg.epochs = 1000;
  const auto lm = nre::nre_train(line, lcfg).model;
  std::cout << fmt::format("  NRE from a depth-2 tree ({} rules): {:.2f}%\n", lm.rules.size(),
                           100 * nre::evaluate(lm, line));

  if (argc > 2) {
    const auto grid = nre::plot::classify_grid(model, nre::plot::data_bounds(test), 200);
    std::ofstream(argv[2]) << nre::plot::render_svg(grid, test);
    std::cout << "wrote " << argv[2] << "\n";
  }
}
