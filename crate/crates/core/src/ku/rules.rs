//! The capability rule table.
//!
//! Each rule is data: node kinds with an optional structural predicate, a
//! type allowlist checked against resolved type mentions, or method names with
//! a gate. Rules are listed in KU order and then capability order; the order is
//! significant for attributing a type mention inside one KU.

use tree_sitter::Node;

use super::RuleContext;
use crate::java::{has_modifier, named_children, DeclaredKind, TypeOrigin};

/// Version of the rule table. Bump whenever a matcher changes.
pub const RULESET_VERSION: &str = "1.0.0";

pub type Predicate = fn(&RuleContext<'_>, Node<'_>) -> bool;

/// What a capability matches. Every variant counts one hit per syntactic site.
#[derive(Clone, Copy)]
pub enum Matcher {
    /// Nodes of one of `kinds` for which `when` holds (all of them if `None`).
    Syntax { kinds: &'static [&'static str], when: Option<Predicate> },
    /// Type mentions resolving to a listed qualified type (or a type nested in
    /// it), or into a listed package or one of its subpackages.
    Api { types: &'static [&'static str], packages: &'static [&'static str] },
    /// Method invocations by name.
    Call { names: &'static [&'static str], gate: CallGate },
    /// Sum of the parts. Parts must match disjoint sites.
    All(&'static [Matcher]),
}

impl std::fmt::Debug for Matcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Matcher::Syntax { kinds, when } => {
                f.debug_struct("Syntax").field("kinds", kinds).field("predicate", &when.is_some()).finish()
            }
            Matcher::Api { types, packages } => {
                f.debug_struct("Api").field("types", types).field("packages", packages).finish()
            }
            Matcher::Call { names, gate } => f.debug_struct("Call").field("names", names).field("gate", gate).finish(),
            Matcher::All(parts) => f.debug_tuple("All").field(parts).finish(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallGate {
    Always,
    /// The receiver chain starts from a stream source.
    StreamChain,
    NotStreamChain,
    /// The receiver is one of these simple identifiers.
    Receiver(&'static [&'static str]),
    /// The file imports or spells out a package under one of these prefixes.
    Imports(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct CapabilityRule {
    /// 1-based KU number.
    pub ku: usize,
    /// Capability label within the KU, e.g. `C2`.
    pub label: &'static str,
    /// Full identifier, e.g. `K8.C2`.
    pub id: &'static str,
    pub description: &'static str,
    pub matcher: Matcher,
}

pub const KU_COUNT: usize = 28;

pub const KU_NAMES: [&str; KU_COUNT] = [
    "Data Type",
    "Operator and Decision",
    "Array",
    "Loop",
    "Method and Encapsulation",
    "Inheritance",
    "Advanced Class Design",
    "Generics and Collection",
    "Functional Interface",
    "Stream API",
    "Exception",
    "Date Time API",
    "IO",
    "NIO",
    "String Processing",
    "Concurrency",
    "Database",
    "Localization",
    "Java Persistence",
    "Enterprise Java Bean",
    "Java Message Service API",
    "SOAP Web Service",
    "Servlet",
    "Java REST API",
    "Websocket",
    "Java Server Faces",
    "Contexts and Dependency Injection (CDI)",
    "Batch Processing",
];

const fn syntax(kinds: &'static [&'static str]) -> Matcher {
    Matcher::Syntax { kinds, when: None }
}

const fn syntax_if(kinds: &'static [&'static str], when: Predicate) -> Matcher {
    Matcher::Syntax { kinds, when: Some(when) }
}

const fn api(types: &'static [&'static str]) -> Matcher {
    Matcher::Api { types, packages: &[] }
}

const fn api_pkg(types: &'static [&'static str], packages: &'static [&'static str]) -> Matcher {
    Matcher::Api { types, packages }
}

const fn call(names: &'static [&'static str], gate: CallGate) -> Matcher {
    Matcher::Call { names, gate }
}

macro_rules! rule {
    ($ku:literal, $label:literal, $desc:literal, $m:expr) => {
        CapabilityRule { ku: $ku, label: $label, id: concat!("K", $ku, ".", $label), description: $desc, matcher: $m }
    };
}

pub static RULES: [CapabilityRule; 94] = [
    // K1
    rule!(1, "C1", "Declare and initialize different types of variableS(e.g., primitive type, parameterized type, and array type), including the casting of primitive data types",
        syntax_if(&["variable_declarator", "cast_expression"], variable_or_primitive_cast)),
    // K2
    rule!(2, "C1", "Use Java operators(e.g., assignment and postfix operators); use parentheses to override operator precedence",
        syntax_if(&["assignment_expression", "update_expression", "parenthesized_expression"], not_a_condition)),
    rule!(2, "C2", "Test equality between strings and other objects using == and equals()",
        Matcher::All(&[
            syntax_if(&["binary_expression"], is_equality_operator),
            call(&["equals"], CallGate::Always),
        ])),
    rule!(2, "C3", "Create and use if, if-else, and ternary constructs",
        syntax(&["if_statement", "ternary_expression"])),
    rule!(2, "C4", "Use a switch statement", syntax(&["switch_expression"])),
    // K3
    rule!(3, "C1", "Declare, instantiate, initialize and use a one-dimensional array",
        syntax_if(ARRAY_SITES, one_dimensional)),
    rule!(3, "C2", "Declare, instantiate, initialize and use a multi-dimensional array",
        syntax_if(ARRAY_SITES, multi_dimensional)),
    // K4
    rule!(4, "C1", "Create and use while loops", syntax(&["while_statement"])),
    rule!(4, "C2", "Create and use for loops, including the enhanced for loop",
        syntax(&["for_statement", "enhanced_for_statement"])),
    rule!(4, "C3", "Create and use do-while loops", syntax(&["do_statement"])),
    rule!(4, "C4", "Use break statement", syntax_if(&["break_statement"], breaks_loop)),
    rule!(4, "C5", "Use continue statement", syntax(&["continue_statement"])),
    // K5
    rule!(5, "C1", "Create methods with arguments and return values",
        syntax_if(&["method_declaration"], has_params_or_returns)),
    rule!(5, "C2", "Apply the \"static\" keyword to methods, fields, and blocks",
        Matcher::All(&[
            syntax_if(&["method_declaration", "field_declaration"], is_static),
            syntax(&["static_initializer"]),
        ])),
    rule!(5, "C3", "Create an overloaded method and overloaded constructor",
        syntax_if(&["method_declaration", "constructor_declaration"], is_overloaded)),
    rule!(5, "C4", "Create a constructor chaining (use \"this()\" method to call one constructor from another constructor",
        syntax_if(&["explicit_constructor_invocation"], calls_this)),
    rule!(5, "C5", "Use variable length arguments in the methods", syntax(&["spread_parameter"])),
    rule!(5, "C6", "Use different access modifiers (e.g., private and protected) other than \"default\"",
        syntax_if(ACCESS_DECLARATIONS, has_access_modifier)),
    rule!(5, "C7", "Apply encapsulation: identify set and get method to initialize any private class variables",
        syntax_if(&["method_declaration"], is_accessor)),
    rule!(5, "C8", "Apply encapsulation: Immutable class generation-final class and initialize private variables through the constructor",
        syntax_if(&["class_declaration"], is_immutable_class)),
    // K6
    rule!(6, "C1", "Use basic polymorphism (e.g., a superclass refers to a subclass)",
        syntax_if(&["variable_declarator"], supertype_refers_to_subtype)),
    rule!(6, "C2", "Use polymorphic parameter (e.g., pass instances of a subclass or interface to a method)",
        syntax_if(&["formal_parameter", "spread_parameter"], polymorphic_parameter)),
    rule!(6, "C3", "Create overridden methods", syntax_if(&["method_declaration"], is_override)),
    rule!(6, "C4", "Create \"abstract\" classes and \"abstract\" methods",
        syntax_if(&["class_declaration", "method_declaration"], is_abstract)),
    rule!(6, "C5", "Create \"interface\" and implement the interface",
        Matcher::All(&[
            syntax(&["interface_declaration"]),
            syntax_if(&["type_identifier", "scoped_type_identifier", "generic_type"], is_implemented_interface),
        ])),
    rule!(6, "C6", "Use \"super()\" and the \"super\" keyword to access the members(e.g., fields and methods) of a parent class",
        syntax_if(&["explicit_constructor_invocation", "field_access", "method_invocation"], uses_super)),
    rule!(6, "C7", "Use casting in referring a subclass object to a superclass object",
        syntax_if(&["cast_expression"], is_reference_cast)),
    // K7
    rule!(7, "C1", "Create inner classes, including static inner classes, local classes, nested classes, and anonymous inner classes",
        syntax_if(&["class_declaration", "interface_declaration", "enum_declaration", "object_creation_expression"], is_inner_class)),
    rule!(7, "C2", "Develop code that uses the final", syntax_if(&["modifiers"], has_final)),
    rule!(7, "C3", "Use enumerated types including methods and constructors in an \"enum\" type",
        Matcher::All(&[
            syntax(&["enum_declaration"]),
            syntax_if(&["method_declaration", "constructor_declaration"], is_enum_member),
        ])),
    rule!(7, "C4", "Create singleton classes and immutable classes",
        syntax_if(&["class_declaration"], is_singleton_or_immutable)),
    // K8
    rule!(8, "C1", "Create and use a generic class",
        syntax_if(&["class_declaration", "interface_declaration"], has_type_parameters)),
    rule!(8, "C2", "Create and use ArrayList, TreeSet, TreeMap, and ArrayDeque", api(&[
        "java.util.ArrayList", "java.util.TreeSet", "java.util.TreeMap", "java.util.ArrayDeque",
        "java.util.List", "java.util.Set", "java.util.Map", "java.util.Deque", "java.util.Queue",
        "java.util.Collection", "java.util.Collections", "java.util.HashMap", "java.util.HashSet",
        "java.util.LinkedList", "java.util.LinkedHashMap", "java.util.LinkedHashSet",
        "java.util.SortedMap", "java.util.SortedSet", "java.util.NavigableMap",
        "java.util.NavigableSet", "java.util.PriorityQueue", "java.util.Iterator",
        "java.util.Vector", "java.util.Hashtable", "java.util.Stack",
    ])),
    rule!(8, "C3", "Use java.util.Comparator and java.lang.Comparable interfaces",
        api(&["java.util.Comparator", "java.lang.Comparable"])),
    rule!(8, "C4", "Iterate using forEach methods of List", call(&["forEach"], CallGate::NotStreamChain)),
    // K9
    rule!(9, "C1", "Use the built-in interfaces included in the java.util.function packages such as Predicate, Consumer, Function, and Supplier",
        api_pkg(&[
            "java.util.function.Predicate", "java.util.function.Consumer",
            "java.util.function.Function", "java.util.function.Supplier",
        ], &["java.util.function"])),
    rule!(9, "C2", "Develop code that uses primitive versions of functional interfaces", api(&[
        "java.util.function.IntPredicate", "java.util.function.LongPredicate",
        "java.util.function.DoublePredicate", "java.util.function.IntFunction",
        "java.util.function.LongFunction", "java.util.function.DoubleFunction",
        "java.util.function.IntConsumer", "java.util.function.LongConsumer",
        "java.util.function.DoubleConsumer", "java.util.function.IntSupplier",
        "java.util.function.LongSupplier", "java.util.function.DoubleSupplier",
        "java.util.function.BooleanSupplier", "java.util.function.ToIntFunction",
        "java.util.function.ToLongFunction", "java.util.function.ToDoubleFunction",
        "java.util.function.IntToLongFunction", "java.util.function.IntToDoubleFunction",
        "java.util.function.LongToIntFunction", "java.util.function.LongToDoubleFunction",
        "java.util.function.DoubleToIntFunction", "java.util.function.DoubleToLongFunction",
        "java.util.function.IntUnaryOperator", "java.util.function.LongUnaryOperator",
        "java.util.function.DoubleUnaryOperator", "java.util.function.IntBinaryOperator",
        "java.util.function.LongBinaryOperator", "java.util.function.DoubleBinaryOperator",
        "java.util.function.ObjIntConsumer", "java.util.function.ObjLongConsumer",
        "java.util.function.ObjDoubleConsumer",
    ])),
    rule!(9, "C3", "Develop code that uses binary versions of functional interfaces", api(&[
        "java.util.function.BiFunction", "java.util.function.BiConsumer",
        "java.util.function.BiPredicate", "java.util.function.BinaryOperator",
        "java.util.function.ToIntBiFunction", "java.util.function.ToLongBiFunction",
        "java.util.function.ToDoubleBiFunction",
    ])),
    rule!(9, "C4", "Develop code that uses the UnaryOperator interface",
        api(&["java.util.function.UnaryOperator"])),
    // K10
    rule!(10, "C1", "Develop code to extract data from an object using peek() and map() methods, including primitive versions of the map() method",
        call(&["peek", "map", "mapToInt", "mapToLong", "mapToDouble", "mapToObj"], CallGate::StreamChain)),
    rule!(10, "C2", "Search for data by using search methods of the Stream classes, including findFirst, findAny, anyMatch, allMatch, noneMatch",
        call(&["findFirst", "findAny", "anyMatch", "allMatch", "noneMatch"], CallGate::StreamChain)),
    rule!(10, "C3", "Develop code that uses the Optional class", api(&[
        "java.util.Optional", "java.util.OptionalInt", "java.util.OptionalLong",
        "java.util.OptionalDouble",
    ])),
    rule!(10, "C4", "Develop code that uses Stream data methods and calculation methods",
        call(&["count", "min", "max", "sum", "average", "summaryStatistics", "reduce"], CallGate::StreamChain)),
    rule!(10, "C5", "Sort a collection using Stream API", call(&["sorted"], CallGate::StreamChain)),
    rule!(10, "C6", "Save results to a collection using the collect method",
        call(&["collect"], CallGate::StreamChain)),
    rule!(10, "C7", "UseflatMap() methods in the Stream API",
        call(&["flatMap", "flatMapToInt", "flatMapToLong", "flatMapToDouble"], CallGate::StreamChain)),
    // K11
    rule!(11, "C1", "Create a try-catch block",
        syntax_if(&["try_statement", "try_with_resources_statement"], has_catch)),
    rule!(11, "C2", "Use catch, multi-catch, and finally clauses",
        Matcher::All(&[
            syntax_if(&["catch_clause"], is_additional_catch),
            syntax_if(&["catch_type"], is_multi_catch),
            syntax(&["finally_clause"]),
        ])),
    rule!(11, "C3", "Use autoclose resources with a try-with-resources statement",
        syntax(&["try_with_resources_statement"])),
    rule!(11, "C4", "Create custom exceptions and autocloseable resources",
        syntax_if(&["class_declaration"], is_custom_exception_or_resource)),
    rule!(11, "C5", "Create and invoke a method that throws an exception",
        syntax(&["throws", "throw_statement"])),
    rule!(11, "C6", "Use common exception classes and categories(such as NullPointerException, ArithmeticException, ArrayIndexOutOfBoundsException, ClassCastException)",
        api(&[
            "java.lang.NullPointerException", "java.lang.ArithmeticException",
            "java.lang.ArrayIndexOutOfBoundsException", "java.lang.ClassCastException",
            "java.lang.IllegalArgumentException", "java.lang.IllegalStateException",
            "java.lang.NumberFormatException", "java.lang.IndexOutOfBoundsException",
            "java.lang.StringIndexOutOfBoundsException",
            "java.lang.UnsupportedOperationException", "java.lang.Exception",
            "java.lang.RuntimeException", "java.lang.Error", "java.lang.Throwable",
            "java.lang.ExceptionInInitializerError", "java.lang.StackOverflowError",
            "java.lang.OutOfMemoryError", "java.lang.CloneNotSupportedException",
            "java.lang.InterruptedException", "java.lang.AssertionError",
            "java.io.IOException", "java.io.FileNotFoundException",
        ])),
    rule!(11, "C7", "Use assertions", syntax(&["assert_statement"])),
    // K12
    rule!(12, "C1", "Create and manage date-based and time-based events including a combination of date and time into a single object using LocalDate, LocalTime, LocalDateTime, Instant, Period, and Duration",
        api_pkg(&[
            "java.time.LocalDate", "java.time.LocalTime", "java.time.LocalDateTime",
            "java.time.MonthDay", "java.time.YearMonth", "java.time.Year",
        ], &["java.time"])),
    rule!(12, "C2", "Formatting date and times values for using different timezones",
        api_pkg(&[
            "java.time.ZoneId", "java.time.ZoneOffset", "java.time.ZonedDateTime",
            "java.time.OffsetDateTime", "java.time.OffsetTime",
        ], &["java.time.format", "java.time.zone"])),
    rule!(12, "C3", "Create and manage date-based and time-based events using Instant, Period, Duration, and Temporal Unit",
        api_pkg(&["java.time.Instant", "java.time.Period", "java.time.Duration"],
            &["java.time.temporal"])),
    rule!(12, "C4", "Create and manipulate calendar data using classes from java.time.LocalDateTime, java.time.LocalDate, java.time.LocalTime, java.time.format.DateTimeFormatter, and java.time.Period",
        call(&[
            "plusDays", "plusWeeks", "plusMonths", "plusYears", "plusHours", "plusMinutes",
            "plusSeconds", "plusNanos", "minusDays", "minusWeeks", "minusMonths",
            "minusYears", "minusHours", "minusMinutes", "minusSeconds", "minusNanos",
            "withDayOfMonth", "withDayOfYear", "withMonth", "withYear", "withHour",
            "withMinute", "withSecond", "getDayOfWeek", "getDayOfMonth", "getDayOfYear",
            "getMonthValue", "isLeapYear", "atTime", "atStartOfDay", "atDate",
        ], CallGate::Imports(&["java.time"]))),
    // K13
    rule!(13, "C1", "Read and write data using the console",
        Matcher::All(&[
            syntax_if(&["field_access"], is_standard_stream),
            call(&["console"], CallGate::Receiver(&["System"])),
            api(&["java.io.Console"]),
        ])),
    rule!(13, "C2", "Use BufferedReader, BufferedWriter, File, FileReader, FileWriter, FileInputStream, FileOutputStream, ObjectOutputStream, ObjectInputStream, and PrintWriter in the java.io package",
        api_pkg(&[
            "java.io.BufferedReader", "java.io.BufferedWriter", "java.io.File",
            "java.io.FileReader", "java.io.FileWriter", "java.io.FileInputStream",
            "java.io.FileOutputStream", "java.io.ObjectOutputStream",
            "java.io.ObjectInputStream", "java.io.PrintWriter",
        ], &["java.io"])),
    // K14
    rule!(14, "C1", "Use the Path interface to operate on file and directory paths", api(&[
        "java.nio.file.Path", "java.nio.file.Paths", "java.nio.file.FileSystem",
        "java.nio.file.FileSystems",
    ])),
    rule!(14, "C2", "Use the Files class to check, read, delete, copy, move, and manage metadata a file or directory",
        api_pkg(&["java.nio.file.Files"], &["java.nio.file"])),
    // K15
    rule!(15, "C1", "Search, parse and build strings",
        Matcher::All(&[
            call(&[
                "indexOf", "lastIndexOf", "substring", "charAt", "split", "trim",
                "startsWith", "endsWith", "toUpperCase", "toLowerCase", "equalsIgnoreCase",
                "compareToIgnoreCase", "toCharArray", "concat", "codePointAt",
                "regionMatches",
            ], CallGate::Always),
            call(&[
                "parseInt", "parseLong", "parseDouble", "parseFloat", "parseShort",
                "parseByte", "parseBoolean", "valueOf", "join",
            ], CallGate::Receiver(&[
                "String", "Integer", "Long", "Double", "Float", "Short", "Byte", "Boolean",
            ])),
            syntax_if(&["binary_expression", "assignment_expression"], is_string_concatenation),
        ])),
    rule!(15, "C2", "Manipulate data using the StringBuilder class and its methods",
        api(&["java.lang.StringBuilder", "java.lang.StringBuffer"])),
    rule!(15, "C3", "Use regular expression using the Pattern and Matcher class",
        Matcher::All(&[
            api_pkg(&["java.util.regex.Pattern", "java.util.regex.Matcher"], &["java.util.regex"]),
            call(&["matches", "replaceAll", "replaceFirst"], CallGate::Always),
        ])),
    rule!(15, "C4", "Use string formatting",
        Matcher::All(&[
            call(&["printf"], CallGate::Always),
            call(&["format"], CallGate::Receiver(&["String"])),
            api(&["java.util.Formatter", "java.text.MessageFormat"]),
        ])),
    // K16
    rule!(16, "C1", "Create worker threads using Runnable, Callable and use an ExecutorService to concurrently execute tasks",
        api(&[
            "java.lang.Runnable", "java.lang.Thread", "java.util.concurrent.Callable",
            "java.util.concurrent.Executor", "java.util.concurrent.ExecutorService",
            "java.util.concurrent.Executors", "java.util.concurrent.ScheduledExecutorService",
            "java.util.concurrent.Future", "java.util.concurrent.ThreadFactory",
            "java.util.concurrent.ThreadPoolExecutor",
        ])),
    rule!(16, "C2", "Use synchronized keyword and java.util.concurrent.atomic package to control the order of thread execution",
        Matcher::All(&[
            syntax(&["synchronized_statement"]),
            syntax_if(&["method_declaration"], is_synchronized),
            api_pkg(&[], &["java.util.concurrent.atomic"]),
        ])),
    rule!(16, "C3", "Use java.util.concurrent collections and classes including CyclicBarrier and CopyOnWriteArrayList",
        api_pkg(&[
            "java.util.concurrent.CyclicBarrier", "java.util.concurrent.CopyOnWriteArrayList",
        ], &["java.util.concurrent"])),
    rule!(16, "C4", "Use parallel Fork/Join Framework", api(&[
        "java.util.concurrent.ForkJoinPool", "java.util.concurrent.ForkJoinTask",
        "java.util.concurrent.RecursiveTask", "java.util.concurrent.RecursiveAction",
        "java.util.concurrent.ForkJoinWorkerThread",
    ])),
    // K17
    rule!(17, "C1", "Describe the interfaces that make up the core of the JDBC API, including the Driver, Connection, Statement, and ResultSet interfaces",
        api_pkg(&[
            "java.sql.Driver", "java.sql.DriverManager", "java.sql.Connection",
            "java.sql.Statement", "java.sql.PreparedStatement", "java.sql.CallableStatement",
            "java.sql.ResultSet", "javax.sql.DataSource",
        ], &["java.sql", "javax.sql"])),
    rule!(17, "C2", "Submit queries and read results from the database, including creating statements, returning result sets, iterating through the results, and properly closing result sets, statements, and connections",
        call(&[
            "executeQuery", "executeUpdate", "executeBatch", "createStatement",
            "prepareStatement", "prepareCall", "getResultSet", "getConnection", "addBatch",
            "setAutoCommit", "getMetaData",
        ], CallGate::Imports(&["java.sql", "javax.sql"]))),
    // K18
    rule!(18, "C1", "Read and set the locale by using the Locale object", api(&["java.util.Locale"])),
    rule!(18, "C2", "Build a resource bundle for each locale and load a resource bundle in an application",
        api(&[
            "java.util.ResourceBundle", "java.util.ListResourceBundle",
            "java.util.PropertyResourceBundle",
        ])),
    // K19
    rule!(19, "C1", "Create JPA Entity and Object-Relational Mappings (ORM)",
        api_pkg(&[
            "javax.persistence.Entity", "javax.persistence.Table", "javax.persistence.Id",
            "javax.persistence.GeneratedValue", "javax.persistence.Column",
            "javax.persistence.OneToMany", "javax.persistence.ManyToOne",
            "javax.persistence.OneToOne", "javax.persistence.ManyToMany",
            "javax.persistence.JoinColumn", "javax.persistence.JoinTable",
            "javax.persistence.Embeddable", "javax.persistence.Embedded",
            "javax.persistence.EmbeddedId", "javax.persistence.MappedSuperclass",
            "javax.persistence.Inheritance", "javax.persistence.Transient",
            "javax.persistence.Version", "javax.persistence.Enumerated",
            "javax.persistence.Lob", "javax.persistence.ElementCollection",
        ], &["javax.persistence"])),
    rule!(19, "C2", "Use Entity Manager to perform database operations, transactions, and locking with JPA entities",
        api(&[
            "javax.persistence.EntityManager", "javax.persistence.EntityManagerFactory",
            "javax.persistence.EntityTransaction", "javax.persistence.Persistence",
            "javax.persistence.PersistenceContext", "javax.persistence.PersistenceUnit",
            "javax.persistence.LockModeType",
        ])),
    rule!(19, "C3", "Create and execute JPQL statements",
        api_pkg(&[
            "javax.persistence.Query", "javax.persistence.TypedQuery",
            "javax.persistence.NamedQuery", "javax.persistence.NamedQueries",
            "javax.persistence.NamedNativeQuery",
        ], &["javax.persistence.criteria"])),
    // K20
    rule!(20, "S1", "Create session EJB components containing synchronous and asynchronous business methods, manage the life cycle container callbacks, and use interceptors.",
        api_pkg(&[
            "javax.ejb.Stateless", "javax.ejb.Stateful", "javax.ejb.Singleton",
            "javax.ejb.Local", "javax.ejb.Remote", "javax.ejb.LocalBean",
            "javax.ejb.Asynchronous", "javax.ejb.SessionContext", "javax.ejb.EJB",
            "javax.ejb.Startup", "javax.annotation.PostConstruct", "javax.annotation.PreDestroy",
            "javax.ejb.PostActivate", "javax.ejb.PrePassivate",
            "javax.interceptor.Interceptors", "javax.interceptor.AroundInvoke",
            "javax.interceptor.InvocationContext",
        ], &["javax.ejb"])),
    rule!(20, "S2", "Create EJB timers", api(&[
        "javax.ejb.Schedule", "javax.ejb.Schedules", "javax.ejb.Timeout",
        "javax.ejb.TimerService", "javax.ejb.Timer", "javax.ejb.ScheduleExpression",
        "javax.ejb.TimerConfig",
    ])),
    // K21
    rule!(21, "S1", "Implement Java EE message producers and consumers, including Message-Driven beans",
        api_pkg(&["javax.ejb.MessageDriven", "javax.ejb.ActivationConfigProperty"], &["javax.jms"])),
    rule!(21, "S2", "Use transactions with JMS API",
        Matcher::All(&[
            api(&[
                "javax.jms.XAConnectionFactory", "javax.jms.XAJMSContext", "javax.jms.XASession",
                "javax.transaction.UserTransaction", "javax.ejb.TransactionAttribute",
                "javax.ejb.TransactionAttributeType",
            ]),
            call(&["commit", "rollback", "recover"], CallGate::Imports(&["javax.jms"])),
        ])),
    // K22
    rule!(22, "S1", "Create SOAP Web Services and Clients using JAX-WS API",
        api_pkg(&[], &["javax.jws", "javax.xml.ws", "javax.xml.soap"])),
    rule!(22, "S2", "Create marshall and unmarshall Java Objects by using JAXB API",
        api_pkg(&[], &["javax.xml.bind"])),
    // K23
    rule!(23, "S1", "Create Java Servlet and use HTTP methods",
        api_pkg(&[
            "javax.servlet.http.HttpServlet", "javax.servlet.annotation.WebServlet",
            "javax.servlet.http.HttpServletRequest", "javax.servlet.http.HttpServletResponse",
            "javax.servlet.Servlet", "javax.servlet.GenericServlet",
            "javax.servlet.ServletException",
        ], &["javax.servlet"])),
    rule!(23, "S2", "Handle HTTP headers, parameters, cookies",
        Matcher::All(&[
            api(&["javax.servlet.http.Cookie", "javax.servlet.http.HttpSession"]),
            call(&[
                "getParameter", "getParameterValues", "getParameterMap", "getParameterNames",
                "getHeader", "getHeaders", "getHeaderNames", "setHeader", "addHeader",
                "getCookies", "addCookie",
            ], CallGate::Imports(&["javax.servlet"])),
        ])),
    rule!(23, "S3", "Manage servlet life cycle with container callback methods and WebFilters",
        api(&[
            "javax.servlet.Filter", "javax.servlet.annotation.WebFilter",
            "javax.servlet.FilterChain", "javax.servlet.FilterConfig",
            "javax.servlet.ServletContextListener", "javax.servlet.annotation.WebListener",
            "javax.servlet.ServletConfig", "javax.servlet.ServletContext",
            "javax.servlet.ServletContextEvent", "javax.servlet.http.HttpSessionListener",
            "javax.servlet.ServletRequestListener",
        ])),
    // K24
    rule!(24, "S1", "Apply REST service conventions", api(&[
        "javax.ws.rs.GET", "javax.ws.rs.POST", "javax.ws.rs.PUT", "javax.ws.rs.DELETE",
        "javax.ws.rs.HEAD", "javax.ws.rs.OPTIONS", "javax.ws.rs.Path", "javax.ws.rs.PathParam",
        "javax.ws.rs.QueryParam", "javax.ws.rs.FormParam", "javax.ws.rs.HeaderParam",
        "javax.ws.rs.Produces", "javax.ws.rs.Consumes", "javax.ws.rs.core.MediaType",
    ])),
    rule!(24, "S2", "Create REST Services and clients using JAX-RS API", api_pkg(&[
        "javax.ws.rs.client.Client", "javax.ws.rs.client.ClientBuilder",
        "javax.ws.rs.client.WebTarget", "javax.ws.rs.core.Application",
        "javax.ws.rs.ApplicationPath", "javax.ws.rs.core.Response",
    ], &["javax.ws.rs"])),
    // K25
    rule!(25, "S1", "Create WebSocket Server and Client Endpoint Handlers", api_pkg(&[
        "javax.websocket.server.ServerEndpoint", "javax.websocket.ClientEndpoint",
        "javax.websocket.OnOpen", "javax.websocket.OnClose", "javax.websocket.OnMessage",
        "javax.websocket.OnError", "javax.websocket.Endpoint", "javax.websocket.Session",
    ], &["javax.websocket"])),
    rule!(25, "S3", "Produce and consume, encode and decode WebSocket messages", api(&[
        "javax.websocket.Encoder", "javax.websocket.Decoder", "javax.websocket.EncodeException",
        "javax.websocket.DecodeException", "javax.websocket.RemoteEndpoint",
        "javax.websocket.MessageHandler",
    ])),
    // K26
    rule!(26, "S1", "Use JSF syntax and use JSF Tag Libraries", api_pkg(&[
        "javax.faces.bean.ManagedBean", "javax.faces.component.FacesComponent",
        "javax.faces.component.UIComponent", "javax.faces.validator.FacesValidator",
        "javax.faces.convert.FacesConverter",
    ], &["javax.faces"])),
    rule!(26, "S2", "Handle localization and produce messages", Matcher::All(&[
        api(&["javax.faces.application.FacesMessage"]),
        call(&["addMessage", "getMessageBundle"], CallGate::Imports(&["javax.faces"])),
    ])),
    rule!(26, "S3", "Use Expression Language (EL) and interact with CDI beans",
        api_pkg(&["javax.inject.Named"], &["javax.el"])),
    // K27
    rule!(27, "S1", "Create CDI Bean Qualifiers, Producers, Disposers, Interceptors, Events, and Stereotypes",
        api_pkg(&[
            "javax.inject.Qualifier", "javax.inject.Inject", "javax.inject.Singleton",
            "javax.inject.Provider", "javax.interceptor.Interceptor",
            "javax.interceptor.InterceptorBinding",
        ], &["javax.enterprise"])),
    // K28
    rule!(28, "S1", "Implement batch jobs using JSR 352 API", api_pkg(&[], &["javax.batch"])),
];

/// The full rule table in KU and capability order.
pub fn list_rules() -> &'static [CapabilityRule] {
    &RULES
}

// ---- structural predicates ----

const ARRAY_SITES: &[&str] = &["variable_declarator", "formal_parameter", "array_creation_expression", "array_access"];

const ACCESS_DECLARATIONS: &[&str] = &[
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "annotation_type_declaration",
    "method_declaration",
    "constructor_declaration",
    "field_declaration",
    "constant_declaration",
];

const PRIMITIVE_TYPES: &[&str] = &["integral_type", "floating_point_type", "boolean_type"];

const LOOP_KINDS: &[&str] = &["while_statement", "for_statement", "enhanced_for_statement", "do_statement"];

fn parent_kind(node: Node<'_>) -> &'static str {
    node.parent().map(|p| p.kind()).unwrap_or("")
}

fn is_declared_variable(node: Node<'_>) -> bool {
    matches!(parent_kind(node), "local_variable_declaration" | "field_declaration" | "constant_declaration")
}

fn variable_or_primitive_cast(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    match node.kind() {
        "variable_declarator" => is_declared_variable(node),
        _ => node.child_by_field_name("type").is_some_and(|t| PRIMITIVE_TYPES.contains(&t.kind())),
    }
}

fn not_a_condition(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    node.kind() != "parenthesized_expression"
        || !matches!(
            parent_kind(node),
            "if_statement" | "while_statement" | "do_statement" | "switch_expression" | "synchronized_statement"
        )
}

fn is_equality_operator(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    node.child_by_field_name("operator").is_some_and(|op| matches!(op.kind(), "==" | "!="))
}

fn bracket_pairs(ctx: &RuleContext<'_>, node: Option<Node<'_>>) -> usize {
    node.map(|n| ctx.tree.text(n).matches('[').count()).unwrap_or(0)
}

fn type_dimensions(ctx: &RuleContext<'_>, ty: Option<Node<'_>>) -> usize {
    match ty {
        Some(t) if t.kind() == "array_type" => bracket_pairs(ctx, t.child_by_field_name("dimensions")),
        _ => 0,
    }
}

/// Array rank of a declaration, creation, or outermost access; 0 otherwise.
fn array_rank(ctx: &RuleContext<'_>, node: Node<'_>) -> usize {
    match node.kind() {
        "variable_declarator" if is_declared_variable(node) => {
            let decl = node.parent().expect("declarator has a parent");
            type_dimensions(ctx, decl.child_by_field_name("type"))
                + bracket_pairs(ctx, node.child_by_field_name("dimensions"))
        }
        "formal_parameter" => {
            type_dimensions(ctx, node.child_by_field_name("type"))
                + bracket_pairs(ctx, node.child_by_field_name("dimensions"))
        }
        "array_creation_expression" => {
            let mut cursor = node.walk();
            node.children_by_field_name("dimensions", &mut cursor)
                .map(|d| match d.kind() {
                    "dimensions_expr" => 1,
                    _ => ctx.tree.text(d).matches('[').count(),
                })
                .sum()
        }
        "array_access" => {
            let outermost = node
                .parent()
                .is_none_or(|p| p.kind() != "array_access" || p.child_by_field_name("array") != Some(node));
            if !outermost {
                return 0;
            }
            let mut depth = 1;
            let mut cur = node;
            while let Some(inner) = cur.child_by_field_name("array") {
                if inner.kind() != "array_access" {
                    break;
                }
                depth += 1;
                cur = inner;
            }
            depth
        }
        _ => 0,
    }
}

fn one_dimensional(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    array_rank(ctx, node) == 1
}

fn multi_dimensional(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    array_rank(ctx, node) >= 2
}

fn breaks_loop(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    if node.named_child_count() > 0 {
        // Labeled break.
        return true;
    }
    let mut cur = node.parent();
    while let Some(p) = cur {
        if LOOP_KINDS.contains(&p.kind()) {
            return true;
        }
        if matches!(
            p.kind(),
            "switch_expression" | "method_declaration" | "constructor_declaration" | "lambda_expression" | "class_body"
        ) {
            return false;
        }
        cur = p.parent();
    }
    false
}

fn parameter_count(method: Node<'_>) -> usize {
    method
        .child_by_field_name("parameters")
        .map(|p| {
            named_children(p).iter().filter(|c| matches!(c.kind(), "formal_parameter" | "spread_parameter")).count()
        })
        .unwrap_or(0)
}

fn has_params_or_returns(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    parameter_count(node) > 0 || node.child_by_field_name("type").is_some_and(|t| t.kind() != "void_type")
}

fn is_static(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    has_modifier(node, "static")
}

fn member_name<'t>(ctx: &RuleContext<'t>, node: Node<'_>) -> Option<&'t str> {
    node.child_by_field_name("name").map(|n| ctx.tree.text(n))
}

fn is_overloaded(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let Some(parent) = node.parent() else {
        return false;
    };
    let name = member_name(ctx, node);
    named_children(parent)
        .into_iter()
        .filter(|s| s.kind() == node.kind())
        .filter(|s| node.kind() == "constructor_declaration" || member_name(ctx, *s) == name)
        .count()
        > 1
}

fn calls_this(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    node.child_by_field_name("constructor").is_some_and(|c| c.kind() == "this")
}

fn has_access_modifier(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    ["public", "private", "protected"].iter().any(|m| has_modifier(node, m))
}

/// Names of the fields declared directly in a type body.
fn fields_of<'t>(ctx: &RuleContext<'t>, body: Node<'_>, private_only: bool) -> Vec<&'t str> {
    let mut out = Vec::new();
    for member in crate::java::body_members(body) {
        if member.kind() != "field_declaration" {
            continue;
        }
        if private_only && !has_modifier(member, "private") {
            continue;
        }
        let mut cursor = member.walk();
        for d in member.children_by_field_name("declarator", &mut cursor) {
            if let Some(n) = d.child_by_field_name("name") {
                out.push(ctx.tree.text(n));
            }
        }
    }
    out
}

fn decapitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_accessor(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let Some(name) = member_name(ctx, node) else {
        return false;
    };
    let (rest, arity) = if let Some(r) = name.strip_prefix("get") {
        (r, 0)
    } else if let Some(r) = name.strip_prefix("is") {
        (r, 0)
    } else if let Some(r) = name.strip_prefix("set") {
        (r, 1)
    } else {
        return false;
    };
    if !rest.starts_with(|c: char| c.is_uppercase()) || parameter_count(node) != arity {
        return false;
    }
    let Some(body) = node.parent() else {
        return false;
    };
    let field = decapitalize(rest);
    fields_of(ctx, body, true).iter().any(|f| **f == field)
}

fn constructors(body: Node<'_>) -> Vec<Node<'_>> {
    crate::java::body_members(body).into_iter().filter(|m| m.kind() == "constructor_declaration").collect()
}

fn is_immutable_class(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    if !has_modifier(node, "final") {
        return false;
    }
    let Some(body) = node.child_by_field_name("body") else {
        return false;
    };
    let instance_fields: Vec<_> = crate::java::body_members(body)
        .into_iter()
        .filter(|m| m.kind() == "field_declaration" && !has_modifier(*m, "static"))
        .collect();
    !constructors(body).is_empty()
        && !instance_fields.is_empty()
        && instance_fields.iter().all(|f| has_modifier(*f, "private") && has_modifier(*f, "final"))
}

fn is_singleton(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let (Some(body), Some(name)) = (node.child_by_field_name("body"), member_name(ctx, node)) else {
        return false;
    };
    let ctors = constructors(body);
    if ctors.is_empty() || !ctors.iter().all(|c| has_modifier(*c, "private")) {
        return false;
    }
    crate::java::body_members(body).into_iter().any(|m| {
        m.kind() == "field_declaration"
            && has_modifier(m, "static")
            && m.child_by_field_name("type")
                .and_then(|t| crate::java::base_type_name(ctx.tree, t))
                .is_some_and(|t| t == name)
    })
}

fn is_singleton_or_immutable(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    is_singleton(ctx, node) || is_immutable_class(ctx, node)
}

fn supertype_refers_to_subtype(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    if !is_declared_variable(node) {
        return false;
    }
    let declared = node
        .parent()
        .and_then(|d| d.child_by_field_name("type"))
        .and_then(|t| crate::java::base_type_name(ctx.tree, t));
    let created = node
        .child_by_field_name("value")
        .filter(|v| v.kind() == "object_creation_expression")
        .and_then(|v| v.child_by_field_name("type"))
        .and_then(|t| crate::java::base_type_name(ctx.tree, t));
    let (Some(declared), Some(created)) = (declared, created) else {
        return false;
    };
    declared != created && ctx.ancestors_of_written(&created).contains(&declared)
}

fn polymorphic_parameter(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let ty = node.child_by_field_name("type").or_else(|| named_children(node).into_iter().next());
    let Some(name) = ty.and_then(|t| crate::java::written_type_name(ctx.tree, t)) else {
        return false;
    };
    let r = ctx.resolve(&name);
    r.origin == TypeOrigin::ProjectLocal
        && r.qualified
            .as_deref()
            .and_then(|q| ctx.origins.declared(q))
            .is_some_and(|d| matches!(d.kind, DeclaredKind::Interface | DeclaredKind::AbstractClass))
}

fn is_override(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let annotated = crate::java::modifiers_of(node).is_some_and(|m| {
        named_children(m).iter().any(|a| {
            matches!(a.kind(), "marker_annotation" | "annotation")
                && a.child_by_field_name("name")
                    .is_some_and(|n| matches!(ctx.tree.text(n), "Override" | "java.lang.Override"))
        })
    });
    if annotated {
        return true;
    }
    let Some(name) = member_name(ctx, node) else {
        return false;
    };
    let arity = parameter_count(node);
    let Some(body) = node.parent() else {
        return false;
    };
    let Some(owner) = body.parent() else {
        return false;
    };
    let supers: Vec<String> = match owner.kind() {
        "object_creation_expression" => owner
            .child_by_field_name("type")
            .and_then(|t| crate::java::base_type_name(ctx.tree, t))
            .map(|created| {
                let mut v = ctx.ancestors_of_written(&created);
                v.push(created);
                v
            })
            .unwrap_or_default(),
        "class_declaration" | "enum_declaration" | "interface_declaration" => {
            let (superclass, interfaces) = crate::java::supertypes(ctx.tree, owner);
            let mut v = Vec::new();
            for s in superclass.into_iter().chain(interfaces) {
                v.extend(ctx.ancestors_of_written(&s));
                v.push(s);
            }
            v
        }
        _ => return false,
    };
    supers.iter().any(|s| {
        ctx.declared_for_written(s)
            .is_some_and(|d| d.methods.iter().any(|m| !m.private && m.name == name && m.arity == arity))
    })
}

fn is_abstract(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    has_modifier(node, "abstract")
}

fn is_implemented_interface(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    let Some(list) = node.parent() else {
        return false;
    };
    list.kind() == "type_list" && list.parent().is_some_and(|p| p.kind() == "super_interfaces")
}

fn uses_super(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    let field = match node.kind() {
        "explicit_constructor_invocation" => "constructor",
        _ => "object",
    };
    node.child_by_field_name(field).is_some_and(|c| c.kind() == "super")
}

fn is_reference_cast(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    node.child_by_field_name("type").is_some_and(|t| !PRIMITIVE_TYPES.contains(&t.kind()))
}

fn is_inner_class(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    if node.kind() == "object_creation_expression" {
        return named_children(node).iter().any(|c| c.kind() == "class_body");
    }
    !matches!(parent_kind(node), "program" | "ERROR" | "")
}

fn has_final(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    crate::java::children(node).iter().any(|c| c.kind() == "final")
}

fn is_enum_member(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    parent_kind(node) == "enum_body_declarations"
}

fn has_type_parameters(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    node.child_by_field_name("type_parameters").is_some()
        || named_children(node).iter().any(|c| c.kind() == "type_parameters")
}

fn has_catch(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    named_children(node).iter().any(|c| c.kind() == "catch_clause")
}

fn is_additional_catch(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    let mut prev = node.prev_named_sibling();
    while let Some(p) = prev {
        if p.kind() == "catch_clause" {
            return true;
        }
        prev = p.prev_named_sibling();
    }
    false
}

fn is_multi_catch(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    named_children(node).len() > 1
}

const THROWABLE_ROOTS: &[&str] = &["Throwable", "Exception", "RuntimeException", "Error"];
const RESOURCE_ROOTS: &[&str] = &["AutoCloseable", "Closeable"];

fn is_custom_exception_or_resource(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let (superclass, interfaces) = crate::java::supertypes(ctx.tree, node);
    let mut names = Vec::new();
    for s in superclass.into_iter().chain(interfaces) {
        names.extend(ctx.ancestors_of_written(&s));
        names.push(s);
    }
    names.iter().any(|n| {
        THROWABLE_ROOTS.contains(&n.as_str())
            || RESOURCE_ROOTS.contains(&n.as_str())
            || n.ends_with("Exception")
            || n.ends_with("Error")
    })
}

fn is_standard_stream(ctx: &RuleContext<'_>, node: Node<'_>) -> bool {
    let object = node.child_by_field_name("object");
    let field = node.child_by_field_name("field");
    match (object, field) {
        (Some(o), Some(f)) => {
            o.kind() == "identifier" && ctx.tree.text(o) == "System" && matches!(ctx.tree.text(f), "out" | "err" | "in")
        }
        _ => false,
    }
}

fn is_string_concatenation(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    let op = node.child_by_field_name("operator").map(|o| o.kind());
    let is_string = |n: Option<Node<'_>>| n.is_some_and(|n| n.kind() == "string_literal");
    match (node.kind(), op) {
        ("binary_expression", Some("+")) => {
            is_string(node.child_by_field_name("left")) || is_string(node.child_by_field_name("right"))
        }
        ("assignment_expression", Some("+=")) => is_string(node.child_by_field_name("right")),
        _ => false,
    }
}

fn is_synchronized(_: &RuleContext<'_>, node: Node<'_>) -> bool {
    has_modifier(node, "synchronized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn rule_counts_per_ku() {
        let expected = [1, 4, 2, 5, 8, 7, 4, 4, 4, 7, 7, 4, 2, 2, 4, 4, 2, 2, 3, 2, 2, 2, 3, 2, 2, 3, 1, 1];
        for (k, want) in expected.iter().enumerate() {
            let got = RULES.iter().filter(|r| r.ku == k + 1).count();
            assert_eq!(got, *want, "K{}", k + 1);
        }
        assert_eq!(RULES.len(), 94);
    }

    #[test]
    fn ids_are_unique_and_ordered() {
        let ids: BTreeSet<_> = RULES.iter().map(|r| r.id).collect();
        assert_eq!(ids.len(), RULES.len());
        assert!(RULES.windows(2).all(|w| w[0].ku <= w[1].ku));
        for r in RULES.iter() {
            assert!(r.id.starts_with(&format!("K{}.", r.ku)));
            assert!(r.id.ends_with(r.label));
            assert!((1..=KU_COUNT).contains(&r.ku));
        }
    }

    #[test]
    fn allowlists_are_qualified() {
        fn check(m: &Matcher) {
            match m {
                Matcher::Api { types, packages } => {
                    assert!(!types.is_empty() || !packages.is_empty());
                    for t in types.iter().chain(packages.iter()) {
                        assert!(t.starts_with("java.") || t.starts_with("javax."), "{t}");
                    }
                }
                Matcher::All(parts) => parts.iter().for_each(check),
                _ => {}
            }
        }
        RULES.iter().for_each(|r| check(&r.matcher));
    }
}
