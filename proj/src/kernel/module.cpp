#include "compatient/kernel/module.hpp"

namespace compatient {

std::vector<Port> ModelModule::output_ports() const {
  std::vector<Port> ports = layout().variables();
  for (auto& v : observables()) ports.push_back(std::move(v));
  return ports;
}

}  // namespace compatient
