// Writes a planted-partition stand-in dataset in the on-disk dataset format.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "simgc/io/dataset_io.hpp"
#include "simgc/io/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate a synthetic citation-style dataset"};
  simgc::io::SyntheticSpec s;
  std::string out;
  bool inductive = false;
  app.add_option("out", out, "output directory")->required();
  app.add_option("--nodes", s.nodes);
  app.add_option("--classes", s.classes);
  app.add_option("--features", s.features);
  app.add_option("--avg-degree", s.avg_degree);
  app.add_option("--homophily", s.homophily);
  app.add_option("--words", s.words_per_node);
  app.add_option("--topic-share", s.topic_share);
  app.add_option("--label-noise", s.label_noise);
  app.add_option("--train-per-class", s.train_per_class);
  app.add_option("--val", s.val);
  app.add_option("--test", s.test);
  app.add_option("--seed", s.seed);
  app.add_flag("--inductive", inductive);
  CLI11_PARSE(app, argc, argv);
  s.mode = inductive ? simgc::Mode::inductive : simgc::Mode::transductive;
  try {
    simgc::io::save_dataset(out, simgc::io::make_synthetic<float>(s));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
