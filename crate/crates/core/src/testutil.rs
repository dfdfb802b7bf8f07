//! Shared fixtures for unit and integration tests.

use crate::map::{make_special, CentralPoint, GdsMapping, Point2, SpecialForm};

/// The running example: ellipse-circle form with a = 1, b = 2 over the
/// centers (0,0), (1,0), (0,1). Its only singular point is (2, −1).
pub fn worked_example() -> GdsMapping {
    let p = CentralPoint::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
    ])
    .unwrap();
    make_special(SpecialForm::EllipseCircle { a: 1.0, b: 2.0 }, p).unwrap()
}

/// The worked example extended by a fourth center (1,1); no singular points.
pub fn worked_example_ell4() -> GdsMapping {
    let p = CentralPoint::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(1.0, 1.0),
    ])
    .unwrap();
    make_special(SpecialForm::EllipseCircle { a: 1.0, b: 2.0 }, p).unwrap()
}

/// Minimal XML well-formedness check for generated SVG: tags must nest
/// properly, every attribute value must be quoted (even quote count per
/// tag), and no stray `<` or `>` may appear in text content.
pub fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let before = &rest[..open];
        assert!(
            !before.contains('>'),
            "stray '>' in text content: {before:?}"
        );
        let tail = &rest[open + 1..];
        let close = tail.find('>').expect("unterminated tag");
        let tag = &tail[..close];
        assert_eq!(
            tag.matches('"').count() % 2,
            0,
            "unbalanced quotes in <{tag}>"
        );
        if let Some(name) = tag.strip_prefix('/') {
            let expected = stack.pop().unwrap_or_else(|| panic!("unmatched </{name}>"));
            assert_eq!(expected, name.trim(), "mismatched closing tag");
        } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
            let name = tag.split_whitespace().next().expect("empty tag");
            stack.push(name.to_string());
        }
        rest = &tail[close + 1..];
    }
    assert!(!rest.contains('>'), "stray '>' after last tag");
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}
