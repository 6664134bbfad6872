#include <fstream>
#include <istream>
#include <ostream>

#include "rumnet/models.hpp"
#include "rumnet/text_io.hpp"

namespace rumnet {

namespace {

void write_vector(std::ostream& os, const char* tag, std::span<const double> v) {
  os << tag << ' ' << v.size();
  for (double x : v) os << ' ' << format_double(x);
  os << '\n';
}

std::vector<double> read_vector(TokenReader& in, const char* tag) {
  in.expect(tag);
  std::vector<double> v(in.next_size("vector length"));
  for (double& x : v) x = in.next_double(tag);
  return v;
}

}  // namespace

void write_model(std::ostream& os, const ChoiceModel& model) {
  os << "choice_model v1\n";
  os << "kind " << to_string(model.type()) << '\n';
  os << "dims " << model.d_x() << ' ' << model.d_z() << '\n';
  switch (model.type()) {
    case ModelType::Mnl:
      write_vector(os, "beta", model.as<MnlModel>().beta);
      break;
    case ModelType::TasteNet: {
      const auto& m = model.as<TasteNetModel>();
      write_vector(os, "beta", m.beta);
      write_network(os, m.taste);
      break;
    }
    case ModelType::DeepMnl:
      write_network(os, model.as<DeepMnlModel>().net);
      break;
    case ModelType::Rumnet: {
      const auto& m = model.as<RumnetModel>();
      os << "rumnet " << m.K << ' ' << m.d_eps << ' ' << m.d_nu << '\n';
      write_network(os, m.utility);
      for (const auto& net : m.eps_nets) write_network(os, net);
      for (const auto& net : m.nu_nets) write_network(os, net);
      break;
    }
    case ModelType::Vnn: {
      const auto& m = model.as<VnnModel>();
      os << "vnn " << m.n << '\n';
      write_network(os, m.net);
      break;
    }
  }
  os << "end\n";
}

ChoiceModel read_model(std::istream& is) {
  TokenReader in(is);
  in.expect("choice_model");
  in.expect("v1");
  in.expect("kind");
  const ModelType type = model_type_from_string(in.next("model kind"));
  in.expect("dims");
  const std::size_t d_x = in.next_size("d_x");
  const std::size_t d_z = in.next_size("d_z");
  ChoiceModel::Kind kind;
  switch (type) {
    case ModelType::Mnl:
      kind = MnlModel{read_vector(in, "beta")};
      break;
    case ModelType::TasteNet: {
      TasteNetModel m;
      m.beta = read_vector(in, "beta");
      m.taste = read_network(is);
      kind = std::move(m);
      break;
    }
    case ModelType::DeepMnl:
      kind = DeepMnlModel{read_network(is)};
      break;
    case ModelType::Rumnet: {
      RumnetModel m;
      in.expect("rumnet");
      m.K = in.next_size("K");
      m.d_eps = in.next_size("d_eps");
      m.d_nu = in.next_size("d_nu");
      m.utility = read_network(is);
      for (std::size_t k = 0; k < m.K; ++k) m.eps_nets.push_back(read_network(is));
      for (std::size_t k = 0; k < m.K; ++k) m.nu_nets.push_back(read_network(is));
      kind = std::move(m);
      break;
    }
    case ModelType::Vnn: {
      VnnModel m;
      in.expect("vnn");
      m.n = in.next_size("n");
      m.net = read_network(is);
      kind = std::move(m);
      break;
    }
  }
  in.expect("end");
  return ChoiceModel(std::move(kind), d_x, d_z);
}

void save_model(const std::string& path, const ChoiceModel& model) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_model(os, model);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

ChoiceModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open model file '" + path + "'");
  return read_model(is);
}

}  // namespace rumnet
