//! Versioned JSON instance documents.
//!
//! Scalars are laid out one per line and each item sits on its own line, so
//! golden files diff item by item. Item banks are stored verbatim; numbers
//! use shortest round-trip formatting, making read-after-write lossless.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Instance, Item, ItemClass, WeightSpec};
use crate::error::{Error, Result};
use crate::sampling::WeightOracle;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    schema_version: u32,
    label: String,
    seed: u64,
    class_count: usize,
    capacity: f64,
    required_confidence: f64,
    empirical_bank_size: usize,
    classes: Vec<ClassDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassDoc {
    items: Vec<ItemDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemDoc {
    cost: f64,
    weight: WeightSpec,
    bank: Vec<f64>,
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Writes `instance` as a schema-versioned document.
pub fn write_instance<W: Write>(instance: &Instance, mut out: W) -> Result<()> {
    writeln!(out, "{{")?;
    writeln!(out, "  \"schema_version\": {SCHEMA_VERSION},")?;
    writeln!(out, "  \"label\": {},", json(instance.label()))?;
    writeln!(out, "  \"seed\": {},", instance.seed())?;
    writeln!(out, "  \"class_count\": {},", instance.class_count())?;
    writeln!(out, "  \"capacity\": {},", json(&instance.capacity()))?;
    writeln!(out, "  \"required_confidence\": {},", json(&instance.required_confidence()))?;
    writeln!(out, "  \"empirical_bank_size\": {},", instance.empirical_bank_size())?;
    writeln!(out, "  \"classes\": [")?;
    let m = instance.class_count();
    for (i, class) in instance.classes().iter().enumerate() {
        writeln!(out, "    {{\"items\": [")?;
        for (j, item) in class.items.iter().enumerate() {
            let doc = ItemDoc { cost: item.cost, weight: item.spec().clone(), bank: item.oracle.bank().to_vec() };
            let sep = if j + 1 < class.len() { "," } else { "" };
            writeln!(out, "      {}{sep}", json(&doc))?;
        }
        let sep = if i + 1 < m { "," } else { "" };
        writeln!(out, "    ]}}{sep}")?;
    }
    writeln!(out, "  ]")?;
    writeln!(out, "}}")?;
    Ok(())
}

fn schema_error(err: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = err.path().to_string();
    let message = err.inner().to_string();
    if let Some(rest) = message.strip_prefix("unknown variant `") {
        if let Some(end) = rest.find('`') {
            return Error::UnknownFamily { path, tag: rest[..end].to_string() };
        }
    }
    Error::Schema { path, message }
}

/// Reads and validates a document written by [`write_instance`].
pub fn read_instance<R: Read>(source: R) -> Result<Instance> {
    let mut de = serde_json::Deserializer::from_reader(source);
    let doc: InstanceDoc = serde_path_to_error::deserialize(&mut de).map_err(schema_error)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion { found: doc.schema_version, expected: SCHEMA_VERSION });
    }
    if doc.class_count != doc.classes.len() {
        return Err(Error::invariant(
            "class_count",
            format!("declares {} classes but {} are listed", doc.class_count, doc.classes.len()),
        ));
    }
    let mut classes = Vec::with_capacity(doc.classes.len());
    for (i, class) in doc.classes.into_iter().enumerate() {
        let mut items = Vec::with_capacity(class.items.len());
        for (j, item) in class.items.into_iter().enumerate() {
            let path = format!("classes[{i}].items[{j}]");
            item.weight.validate(&format!("{path}.weight"))?;
            if item.bank.len() != doc.empirical_bank_size {
                return Err(Error::invariant(
                    format!("{path}.bank"),
                    format!("bank holds {} samples, expected {}", item.bank.len(), doc.empirical_bank_size),
                ));
            }
            let oracle = WeightOracle::from_bank(item.weight, item.bank).map_err(|e| match e {
                Error::Invariant { path: p, reason } => Error::Invariant { path: format!("{path}.{p}"), reason },
                other => other,
            })?;
            items.push(Item::new(item.cost, oracle));
        }
        classes.push(ItemClass::new(items));
    }
    Instance::new(doc.label, classes, doc.capacity, doc.required_confidence, doc.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_app_instance, generate_lab_instance, Scale};

    fn roundtrip(inst: &Instance) -> Instance {
        let mut buf = Vec::new();
        write_instance(inst, &mut buf).unwrap();
        read_instance(buf.as_slice()).unwrap()
    }

    #[test]
    fn lab_roundtrip_is_identity() {
        let inst = generate_lab_instance(Scale::Ls1, 1);
        assert_eq!(roundtrip(&inst), inst);
    }

    #[test]
    fn app_roundtrip_is_identity() {
        let inst = generate_app_instance(Scale::Ls2, 5);
        assert_eq!(roundtrip(&inst), inst);
    }

    fn small_doc() -> serde_json::Value {
        let inst = generate_lab_instance(Scale::Ls1, 1);
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        serde_json::from_slice(&buf).unwrap()
    }

    fn read_value(v: &serde_json::Value) -> Result<Instance> {
        read_instance(serde_json::to_vec(v).unwrap().as_slice())
    }

    #[test]
    fn missing_capacity_names_the_field() {
        let mut v = small_doc();
        v.as_object_mut().unwrap().remove("capacity");
        let err = read_value(&v).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
        assert!(err.to_string().contains("capacity"), "{err}");
    }

    #[test]
    fn out_of_range_confidence_is_an_invariant_error() {
        let mut v = small_doc();
        v["required_confidence"] = serde_json::json!(1.5);
        let err = read_value(&v).unwrap_err();
        assert!(matches!(err, Error::Invariant { ref path, .. } if path == "required_confidence"), "{err}");
    }

    #[test]
    fn unknown_family_is_reported_with_path() {
        let mut v = small_doc();
        v["classes"][2]["items"][3]["weight"]["family"] = serde_json::json!("cauchy");
        match read_value(&v).unwrap_err() {
            Error::UnknownFamily { path, tag } => {
                assert_eq!(tag, "cauchy");
                assert!(path.starts_with("classes[2].items[3]"), "{path}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_parameters_report_the_item() {
        let mut v = small_doc();
        v["classes"][0]["items"][0]["weight"] = serde_json::json!({"family": "gamma", "shape": -1.0, "scale": 1.0});
        let err = read_value(&v).unwrap_err();
        assert!(err.to_string().contains("classes[0].items[0].weight"), "{err}");
    }

    #[test]
    fn version_mismatch() {
        let mut v = small_doc();
        v["schema_version"] = serde_json::json!(99);
        assert!(matches!(read_value(&v), Err(Error::SchemaVersion { found: 99, .. })));
    }
}
