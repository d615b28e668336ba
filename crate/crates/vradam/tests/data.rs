use std::fs;

use vradam::data::{bundled_covtype, load_dataset, parse_csv, parse_libsvm, DataError, DatasetFormat, LabelColumn};

#[test]
fn csv_with_named_label_is_scaled_per_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a, label ,b\n2,3,10\n4,1,10\n3,2,-5\n").unwrap();
    let d = load_dataset(&path, DatasetFormat::Csv, &LabelColumn::Named("label".into())).unwrap();
    assert_eq!((d.num_samples(), d.dim(), d.num_classes()), (3, 2, 3));
    assert_eq!(d.labels(), [2, 0, 1]);
    assert_eq!(d.features(), [0.0, 1.0, 1.0, 1.0, 0.5, 0.0]);
}

#[test]
fn csv_label_first_and_constant_columns() {
    let d = parse_csv("t,x,c\n-1,5,7\n1,9,7\n", &LabelColumn::First).unwrap();
    assert_eq!(d.labels(), [0, 1]);
    assert_eq!(d.features(), [0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn libsvm_fills_missing_features_with_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.svm");
    fs::write(&path, "# header\n1 1:2 3:4\n\n2 2:1 # trailing\n1 1:4\n").unwrap();
    let d = load_dataset(&path, DatasetFormat::Libsvm, &LabelColumn::default()).unwrap();
    assert_eq!((d.num_samples(), d.dim(), d.num_classes()), (3, 3, 2));
    assert_eq!(d.labels(), [0, 1, 0]);
    assert_eq!(d.features(), [0.5, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
}

#[test]
fn format_errors_carry_line_numbers() {
    let line = |e: DataError| match e {
        DataError::Format { line, .. } => line,
        other => panic!("{other}"),
    };
    assert_eq!(line(parse_csv("y,a\n0,1\n1,x\n", &LabelColumn::default()).unwrap_err()), 3);
    assert_eq!(line(parse_csv("y,a\n0,1\n1,2,3\n", &LabelColumn::default()).unwrap_err()), 3);
    assert_eq!(line(parse_csv("a,b\n0,1\n", &LabelColumn::default()).unwrap_err()), 1);
    assert_eq!(line(parse_libsvm("1 1:1\n0 2:1 1:3\n").unwrap_err()), 2);
    assert_eq!(line(parse_libsvm("1 0:1\n").unwrap_err()), 1);
    assert_eq!(line(parse_libsvm("1 1=1\n").unwrap_err()), 1);
}

#[test]
fn gaps_in_the_label_range_are_rejected() {
    assert!(matches!(parse_libsvm("1 1:1\n3 1:2\n"), Err(DataError::Label(_))));
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_dataset(&dir.path().join("absent"), DatasetFormat::Csv, &LabelColumn::default()).unwrap_err();
    assert!(matches!(err, DataError::Io { .. }));
    assert!("arff".parse::<DatasetFormat>().is_err());
}

#[test]
fn bundled_table_shape() {
    let d = bundled_covtype();
    assert_eq!((d.num_samples(), d.dim(), d.num_classes()), (2000, 54, 7));
    assert!(d.features().iter().all(|x| (0.0..=1.0).contains(x)));
}
