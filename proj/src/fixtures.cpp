#include "semfactor/fixtures.hpp"

namespace semfactor::fixtures {

namespace {

const char* const kOccupations[] = {
    "accompanist", "accountant", "acrobat", "actor", "actuary", "admiral",
    "advocate", "agriculturist", "agrologist", "agronomist", "allergist",
    "ambassador", "anaesthesiologist", "anatomist", "animator", "appraiser",
    "archaeologist", "architect", "assembler", "astrologer", "astronaut",
    "athlete", "attorney", "auditor", "babysitter", "baker", "ballerina",
    "banker", "barber", "barista", "barkeeper", "barmaid", "barman", "bartender",
    "beekeeper", "bender", "biographer", "biologist", "bishop", "blacksmith",
    "blocklayer", "boatman", "bodyguard", "bookkeeper", "bookmaker", "botanist",
    "boxer", "brazier", "breeder", "brewer", "bricklayer", "broker", "butcher",
    "cardiologist", "carer", "carpenter", "cellist", "ceo", "chairperson",
    "chancellor", "chaplain", "chef", "chemist", "cleaner", "clerk", "coalman",
    "coastguard", "coder", "comedian", "commentator", "commissioner", "composer",
    "congressman", "congresswoman", "constable", "cook", "copywriter", "coroner",
    "corporal", "councillor", "courier", "curator", "dancer", "dean", "dentist",
    "director-general", "dishwasher", "dockmaster", "doctor", "doorkeeper",
    "dramatist", "dressmaker", "driller", "driver", "dustman", "ecologist",
    "editor", "electrician", "environmentalist", "etcher", "farmer", "firefighter",
    "fireman", "fisher", "flamecutter", "footballer", "forger", "friar",
    "furrier", "gaoler", "gardener", "geodesist", "geographer", "geologist",
    "goatherd", "goldsmith", "governor", "grazier", "grocer", "hairdresser",
    "head-teacher", "historian", "hooker", "housemaid", "innkeeper", "janitor",
    "jeweller", "journalist", "judge", "juggler", "lawyer", "lecturer", "librarian",
    "locksmith", "lyricist", "macroeconomist", "maid", "managing-director",
    "manicurist", "marketer", "marshal", "masseur", "mathematician", "mayor",
    "mechanic", "meteorologist", "midwife", "miner", "money-lender", "monk",
    "nanny", "neurologist", "nightwatchman", "novelist", "nurse", "optician",
    "ornithologist", "painter", "paratrooper", "parliamentarian", "pastry-cook",
    "pharmacist", "philosopher", "photographer", "physicist", "physiotherapist",
    "planter", "plasterer", "plumber", "poet", "policeman", "policewoman",
    "politician", "postman", "postmaster", "potter", "priest", "professor",
    "programmer", "proofreader", "prosecutor", "prostitute", "psychiatrist",
    "psychologist", "psychotherapist", "publicist", "rabbi", "radiographer",
    "rancher", "receptionist", "rector", "retailer", "rheumatologist", "roofer",
    "sailor", "secretary", "senator", "setter-operator", "shepherd", "shoe-polisher",
    "shoemaker", "shopkeeper", "signwriter", "singer", "sociologist", "soldier",
    "solicitor", "sommelier", "sous-chef", "stationmaster", "statistician",
    "steward", "stewardess", "stonecutter", "storekeeper", "surgeon", "tailor",
    "tanner", "tattooist", "telemarketer", "telephonist", "tiler", "translator",
    "treasurer", "typist", "vendor", "waiter", "waitress", "weaver", "webmaster",
    "welder", "writer", "zookeeper", "zoologist",
};

struct ScaleEntry {
    const char* label;
    double score;
};

const ScaleEntry kIsei[] = {
    {"acrobat", 37.59},       {"advocate", 86.72},
    {"ambassador", 78.76},    {"animator", 79.74},
    {"assembler", 27.91},     {"attorney", 86.72},
    {"babysitter", 24.98},    {"barber", 31.08},
    {"barista", 25.04},       {"barmaid", 25.04},
    {"barman", 25.04},        {"bartender", 25.04},
    {"beekeeper", 28.04},     {"bender", 25.78},
    {"biographer", 72.83},    {"biologist", 80.46},
    {"blacksmith", 25.63},    {"botanist", 80.46},
    {"brazier", 28.52},       {"bricklayer", 22.57},
    {"carpenter", 26.62},     {"chairperson", 71.29},
    {"chancellor", 70.34},    {"cleaner", 16.38},
    {"clerk", 43.33},         {"commentator", 72.83},
    {"commissioner", 78.76},  {"congressman", 68.77},
    {"constable", 51.5},      {"cook", 24.53},
    {"councillor", 68.77},    {"courier", 30.34},
    {"curator", 77.19},       {"dancer", 61.82},
    {"dean", 65.01},          {"director-general", 71.29},
    {"dishwasher", 16.5},     {"dressmaker", 23.47},
    {"driver", 26.85},        {"ecologist", 80.46},
    {"editor", 72.83},        {"electrician", 36.35},
    {"environmentalist", 80.46}, {"geographer", 83.09},
    {"geologist", 86.81},     {"goldsmith", 28.12},
    {"governor", 68.77},      {"hairstylist", 31.08},
    {"historian", 83.81},     {"housemaid", 16.38},
    {"janitor", 21.82},       {"jeweller", 28.12},
    {"journalist", 72.83},    {"lawyer", 86.72},
    {"locksmith", 33.16},     {"maid", 14.21},
    {"marshal", 60.92},       {"mathematician", 81.78},
    {"mayor", 68.77},         {"neurologist", 81.92},
    {"novelist", 72.83},      {"optician", 59.85},
    {"ornithologist", 80.46}, {"painter", 61.82},
    {"philosopher", 83.81},   {"physicist", 84.61},
    {"plasterer", 18.02},     {"plumber", 29.16},
    {"poet", 72.83},          {"potter", 24.43},
    {"professor", 85.41},     {"prosecutor", 86.72},
    {"receptionist", 39.02},  {"rector", 70.34},
    {"roofer", 22.16},        {"secretary", 44.94},
    {"senator", 68.77},       {"shoemaker", 18.07},
    {"shopkeeper", 35.34},    {"sociologist", 83.09},
    {"stewardess", 46.76},    {"tanner", 28.08},
    {"tattooist", 50.15},     {"treasurer", 73.38},
    {"vendor", 23.53},        {"waiter", 25.04},
    {"waitress", 25.04},      {"weaver", 28.95},
    {"welder", 28.52},        {"writer", 72.83},
    {"zoologist", 80.46},
};

}  // namespace

const embedding::ConceptSet& occupations() {
    static const embedding::ConceptSet set = [] {
        embedding::ConceptSet s;
        s.provenance = "bundled occupation list";
        s.labels.assign(std::begin(kOccupations), std::end(kOccupations));
        return s;
    }();
    return set;
}

const validation::ExternalScale& isei_partial() {
    static const validation::ExternalScale scale = [] {
        validation::ExternalScale s;
        s.name = "isei-partial";
        for (const auto& e : kIsei) s.entries.emplace_back(e.label, e.score);
        return s;
    }();
    return scale;
}

}  // namespace semfactor::fixtures
