#include "viscoflow/rheology.hpp"

namespace viscoflow {

std::string_view law_name(Law law) {
  switch (law) {
    case Law::HerschelBulkley:
      return "hb";
    case Law::CarreauYield:
      return "carreau";
    case Law::Casson:
      return "casson";
  }
  return "unknown";
}

Law parse_law(std::string_view name) {
  if (name == "hb" || name == "herschel-bulkley") return Law::HerschelBulkley;
  if (name == "carreau") return Law::CarreauYield;
  if (name == "casson") return Law::Casson;
  throw std::invalid_argument("unknown viscosity model '" + std::string(name) + "'");
}

}  // namespace viscoflow
