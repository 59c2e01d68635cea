//! Built-in digital twin ontology: upper-level scaffolding, the twin classes
//! and counterpart relations, plus the vocabulary used by the file formats.

use crate::graph::{Graph, SchemaClass, SchemaRelation};
use crate::term::Term;

pub mod vocab {
    use crate::term::Term;

    pub const GEN_PREFIX: &str = "gen";

    pub const STANDARD_PREFIXES: &[(&str, &str)] = &[
        ("bfo", "http://purl.obolibrary.org/obo/bfo#"),
        ("cco", "https://www.commoncoreontologies.org/"),
        ("dto", "https://w3id.org/dto#"),
        ("gen", "urn:dtkg:gen:"),
        ("owl", "http://www.w3.org/2002/07/owl#"),
        ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
        ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ];

    macro_rules! terms {
        ($($name:ident => $prefix:literal : $local:literal),* $(,)?) => {
            $(
                pub fn $name() -> Term {
                    Term::builtin($prefix, $local)
                }
            )*
        };
    }

    terms! {
        // structural vocabulary of the exchange format
        type_of => "rdf":"type",
        owl_class => "owl":"Class",
        owl_object_property => "owl":"ObjectProperty",
        owl_disjoint_with => "owl":"disjointWith",
        rdfs_sub_class_of => "rdfs":"subClassOf",
        rdfs_sub_property_of => "rdfs":"subPropertyOf",
        rdfs_domain => "rdfs":"domain",
        rdfs_range => "rdfs":"range",
        rdfs_comment => "rdfs":"comment",
        literal => "rdfs":"Literal",

        entity => "bfo":"Entity",
        continuant => "bfo":"Continuant",
        occurrent => "bfo":"Occurrent",
        independent_continuant => "bfo":"IndependentContinuant",
        specifically_dependent_continuant => "bfo":"SpecificallyDependentContinuant",
        generically_dependent_continuant => "bfo":"GenericallyDependentContinuant",
        quality => "bfo":"Quality",
        material_entity => "bfo":"MaterialEntity",
        process => "bfo":"Process",

        information_content_entity => "cco":"InformationContentEntity",
        information_bearing_entity => "cco":"InformationBearingEntity",
        descriptive_ice => "cco":"DescriptiveICE",
        directive_ice => "cco":"DirectiveICE",
        representational_ice => "cco":"RepresentationalICE",
        stasis => "cco":"Stasis",
        change => "cco":"Change",
        environmental_feature => "cco":"EnvironmentalFeature",
        artifact => "cco":"Artifact",

        digital_twin => "dto":"DigitalTwin",
        digital_twin_instance => "dto":"DigitalTwinInstance",
        digital_twin_prototype => "dto":"DigitalTwinPrototype",
        synchronizing_process => "dto":"SynchronizingProcess",
        twinning_rate => "dto":"TwinningRate",
        fidelity => "dto":"Fidelity",
        lifecycle => "dto":"DigitalTwinInstanceLifecycle",
        arrangement_spec => "dto":"ArrangementSpec",
        quality_change => "dto":"QualityChange",
        part_replacement => "dto":"PartReplacement",
        temperature => "dto":"Temperature",
        weight => "dto":"Weight",
        pressure => "dto":"Pressure",
        velocity => "dto":"Velocity",
        thermal_conductivity => "dto":"ThermalConductivity",
        part_presence => "dto":"PartPresence",

        generically_depends_on => "bfo":"genericallyDependsOn",
        participates_in => "bfo":"participatesIn",
        has_continuant_part => "bfo":"hasContinuantPart",
        has_proper_continuant_part => "bfo":"hasProperContinuantPart",
        has_occurrent_part => "bfo":"hasOccurrentPart",
        bears_quality => "bfo":"bearsQuality",
        represents => "cco":"represents",
        describes => "cco":"describes",
        prescribes => "cco":"prescribes",
        is_counterpart_material_entity => "dto":"isCounterpartMaterialEntity",
        is_counterpart_process => "dto":"isCounterpartProcess",
        prescribes_arrangement => "dto":"prescribesArrangement",
        has_value => "dto":"hasValue",
        has_quality_type => "dto":"hasQualityType",
        removed_part => "dto":"removedPart",
        added_part => "dto":"addedPart",
        produces_quality => "dto":"producesQuality",

        // arrangement spec files only
        root_variable => "dto":"rootVariable",
        all_distinct => "dto":"allDistinct",
        bears_quality_of_type => "dto":"bearsQualityOfType",
    }
}

fn class(id: Term, parents: &[Term], definition: &str) -> SchemaClass {
    let mut c = SchemaClass::new(id).defined_as(definition);
    c.superclasses.extend(parents.iter().cloned());
    c
}

fn relation(id: Term, parents: &[Term], domain: Term, range: Term, definition: &str) -> SchemaRelation {
    let mut r = SchemaRelation::new(id, domain, range).defined_as(definition);
    r.superrelations.extend(parents.iter().cloned());
    r
}

fn builtin_classes() -> Vec<SchemaClass> {
    use vocab::*;
    let mut out =
        vec![
        class(entity(), &[], "Anything that exists."),
        class(continuant(), &[entity()], "An entity that endures through time without temporal parts."),
        class(occurrent(), &[entity()], "An entity that unfolds in time and has temporal parts."),
        class(
            independent_continuant(),
            &[continuant()],
            "A continuant that does not depend on any other entity for its existence.",
        ),
        class(
            specifically_dependent_continuant(),
            &[continuant()],
            "A continuant that depends on one particular bearer.",
        ),
        class(quality(), &[specifically_dependent_continuant()], "A measurable characteristic of its bearer."),
        class(
            generically_dependent_continuant(),
            &[continuant()],
            "A continuant that can be copied across interchangeable bearers.",
        ),
        class(material_entity(), &[independent_continuant()], "An independent continuant made partly of matter."),
        class(process(), &[occurrent()], "An occurrent in which continuants participate."),
        class(
            information_content_entity(),
            &[generically_dependent_continuant()],
            "Content that depends on some information bearing entity and is about something.",
        ),
        class(
            information_bearing_entity(),
            &[material_entity()],
            "A material thing carrying information content.",
        ),
        class(descriptive_ice(), &[information_content_entity()], "Content that describes an entity."),
        class(directive_ice(), &[information_content_entity()], "Content that prescribes an entity."),
        class(
            representational_ice(),
            &[information_content_entity()],
            "Content that represents an entity.",
        ),
        class(stasis(), &[process()], "A process with no change in its participants."),
        class(change(), &[process()], "A process in which a participant gains or loses a dependent entity."),
        class(environmental_feature(), &[material_entity()], "A natural or built feature of the environment."),
        class(artifact(), &[material_entity()], "A material entity made to realize a function."),
        class(
            digital_twin(),
            &[information_content_entity()],
            "Content representing a material entity or process, or prescribing an arrangement that yields such a twin.",
        ),
        class(
            digital_twin_instance(),
            &[digital_twin()],
            "A digital twin representing an existing material entity or process.",
        ),
        class(
            digital_twin_prototype(),
            &[digital_twin(), directive_ice()],
            "A digital twin prescribing a class-level arrangement for producing a counterpart.",
        ),
        class(
            synchronizing_process(),
            &[change()],
            "A change updating a digital twin instance from real-time information about its counterpart.",
        ),
        class(
            twinning_rate(),
            &[information_content_entity()],
            "Measurement of how often synchronization occurs.",
        ),
        class(
            fidelity(),
            &[information_content_entity()],
            "Measurement of the information types transferred between a twin and its counterpart.",
        ),
        class(
            lifecycle(),
            &[process()],
            "The process made of all processes in which a twin instance and its counterpart participate.",
        ),
        class(
            arrangement_spec(),
            &[generically_dependent_continuant()],
            "A class-level arrangement of types and relations.",
        ),
        class(quality_change(), &[change()], "A change replacing a quality of a bearer."),
        class(part_replacement(), &[change()], "A change replacing a material part of a whole."),
        class(temperature(), &[quality()], "Temperature quality."),
        class(weight(), &[quality()], "Weight quality."),
        class(pressure(), &[quality()], "Pressure quality."),
        class(velocity(), &[quality()], "Velocity quality."),
        class(thermal_conductivity(), &[quality()], "Thermal conductivity quality."),
        class(literal(), &[], "Datatype values."),
    ];
    let disjoint = [
        (entity(), literal()),
        (continuant(), occurrent()),
        (independent_continuant(), generically_dependent_continuant()),
        (independent_continuant(), specifically_dependent_continuant()),
        (generically_dependent_continuant(), specifically_dependent_continuant()),
    ];
    for (a, b) in disjoint {
        if let Some(c) = out.iter_mut().find(|c| c.id == a) {
            c.disjoint_with.insert(b);
        }
    }
    out
}

fn builtin_relations() -> Vec<SchemaRelation> {
    use vocab::*;
    vec![
        relation(
            generically_depends_on(),
            &[],
            information_content_entity(),
            information_bearing_entity(),
            "Content depends on a bearer carrying a copy of it.",
        ),
        relation(
            represents(),
            &[],
            information_content_entity(),
            entity(),
            "Aboutness by virtue of a correspondence between the carrier and the target.",
        ),
        relation(
            describes(),
            &[],
            information_content_entity(),
            entity(),
            "Aboutness concerning the characteristics by which the target is recognized.",
        ),
        relation(
            prescribes(),
            &[],
            information_content_entity(),
            entity(),
            "Aboutness as a rule or model for the target.",
        ),
        relation(
            participates_in(),
            &[],
            continuant(),
            occurrent(),
            "Participation of a continuant in an occurrent.",
        ),
        relation(
            has_continuant_part(),
            &[],
            continuant(),
            continuant(),
            "Continuant parthood.",
        ),
        relation(
            has_proper_continuant_part(),
            &[has_continuant_part()],
            continuant(),
            continuant(),
            "Continuant parthood excluding identity.",
        ),
        relation(
            has_occurrent_part(),
            &[],
            occurrent(),
            occurrent(),
            "Occurrent parthood.",
        ),
        relation(
            bears_quality(),
            &[],
            material_entity(),
            quality(),
            "A bearer and one of its qualities.",
        ),
        relation(
            is_counterpart_material_entity(),
            &[represents()],
            digital_twin_instance(),
            material_entity(),
            "A twin instance and the material entity it represents and synchronizes with.",
        ),
        relation(
            is_counterpart_process(),
            &[represents()],
            digital_twin_instance(),
            process(),
            "A twin instance and the process it represents during an overlapping synchronization.",
        ),
        relation(
            prescribes_arrangement(),
            &[],
            digital_twin_prototype(),
            arrangement_spec(),
            "A prototype and the arrangement of types it prescribes.",
        ),
        relation(has_value(), &[], entity(), literal(), "Recorded value."),
        relation(
            has_quality_type(),
            &[],
            information_content_entity(),
            literal(),
            "Quality type a descriptive part reports on.",
        ),
        relation(
            removed_part(),
            &[],
            part_replacement(),
            material_entity(),
            "Part taken out by a replacement.",
        ),
        relation(
            added_part(),
            &[],
            part_replacement(),
            material_entity(),
            "Part put in by a replacement.",
        ),
        relation(
            produces_quality(),
            &[],
            quality_change(),
            quality(),
            "Quality gained in a quality change.",
        ),
    ]
}

/// The built-in schema with no instance assertions.
pub fn builtin_schema() -> Graph {
    let mut g = Graph::new();
    g.extend_schema(builtin_classes(), builtin_relations())
        .expect("built-in schema is well-formed");
    g
}

/// Whether a class or relation term belongs to the built-in catalogue
/// unchanged (used to keep exported files short).
pub fn is_builtin_class(class: &SchemaClass) -> bool {
    builtin_classes().iter().any(|c| c == class)
}

pub fn is_builtin_relation(relation: &SchemaRelation) -> bool {
    builtin_relations().iter().any(|r| r == relation)
}
