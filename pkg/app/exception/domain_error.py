class UnknownMorphism(KeyError):
    """Исключение, возникающее когда id морфизма отсутствует в категории"""

    def __init__(self, morphism_id: int, category_name: str = ""):
        """
        :param morphism_id: Идентификатор морфизма
        :param category_name: Название категории (необязательно)
        """
        self.morphism_id = morphism_id
        self.category_name = category_name
        self.message = f"Неизвестный морфизм {morphism_id}"
        if category_name:
            self.message += f" в категории '{category_name}'"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotComposable(ValueError):
    """Исключение, возникающее когда композиция g∘f не определена"""

    def __init__(self, g: int, f: int):
        self.g = g
        self.f = f
        self.message = f"Морфизмы {g} и {f} не компонуются: tgt({f}) != src({g})"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotParallel(ValueError):
    """Исключение, возникающее когда морфизмы должны быть параллельными, но не являются"""

    def __init__(self, f: int, g: int):
        self.f = f
        self.g = g
        self.message = f"Морфизмы {f} и {g} не параллельны"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotACospan(ValueError):
    """Исключение, возникающее когда пара морфизмов не имеет общего кодомена"""

    def __init__(self, f: int, g: int):
        self.f = f
        self.g = g
        self.message = f"Пара ({f}, {g}) не является коспаном"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class InvalidDiagram(ValueError):
    """Исключение, возникающее когда диаграмма не является функтором"""

    def __init__(self, violations: list[str]):
        """
        :param violations: Строки отчета о нарушениях функториальности
        """
        self.violations = violations
        self.message = "Диаграмма не функториальна: " + "; ".join(violations[:5])
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotAFunctor(ValueError):
    """Исключение, возникающее когда отображение категорий не сохраняет композицию или тождества"""

    def __init__(self, violations: list[str]):
        self.violations = violations
        self.message = "Отображение не является функтором: " + "; ".join(violations[:5])
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotARestrictionFunctor(ValueError):
    """Исключение, возникающее когда функтор не сохраняет ограничения F(f̄) = F(f)‾"""

    def __init__(self, morphism_id: int):
        self.morphism_id = morphism_id
        self.message = f"Функтор не сохраняет ограничение морфизма {morphism_id}"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class IncompatibleFamily(ValueError):
    """Исключение, возникающее когда семейство содержит несовместимую пару"""

    def __init__(self, first: int, second: int):
        """
        :param first: Первый элемент несовместимой пары
        :param second: Второй элемент несовместимой пары
        """
        self.first = first
        self.second = second
        self.message = f"Элементы {first} и {second} несовместимы"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotNatural(ValueError):
    """Исключение, возникающее когда семейство компонент не является естественным преобразованием"""

    def __init__(self, morphism_id: int, section: int):
        """
        :param morphism_id: Морфизм, на котором нарушен квадрат естественности
        :param section: Сечение, на котором квадрат не коммутирует
        """
        self.morphism_id = morphism_id
        self.section = section
        self.message = f"Квадрат естественности не коммутирует: морфизм {morphism_id}, сечение {section}"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotAMono(ValueError):
    """Исключение, возникающее когда преобразование предпучков не инъективно покомпонентно"""

    def __init__(self, object_id: int):
        self.object_id = object_id
        self.message = f"Компонента в объекте {object_id} не инъективна"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotGeometric(ValueError):
    """Исключение, возникающее когда M-категория не геометрическая"""

    def __init__(self, violations: list[str]):
        self.violations = violations
        self.message = "M-категория не геометрическая: " + "; ".join(violations[:5])
        super().__init__(self.message)

    def __str__(self):
        return self.message


class NotASheaf(ValueError):
    """Исключение, возникающее когда предпучок не удовлетворяет условию пучка"""

    def __init__(self, presheaf_name: str, object_id: int, sieve: tuple[int, ...], family: tuple[int, ...],
                 amalgamations: int):
        """
        :param presheaf_name: Название предпучка
        :param object_id: Объект, над которым нарушено условие
        :param sieve: Покрывающее решето (отсортированные id морфизмов)
        :param family: Согласованное семейство (сечения в порядке решета)
        :param amalgamations: Количество найденных склеек
        """
        self.presheaf_name = presheaf_name
        self.object_id = object_id
        self.sieve = sieve
        self.family = family
        self.amalgamations = amalgamations
        self.message = (
            f"Предпучок '{presheaf_name}' не пучок: над объектом {object_id} решето {list(sieve)} "
            f"и семейство {list(family)} имеют {amalgamations} склеек"
        )
        super().__init__(self.message)

    def __str__(self):
        return self.message


class UnsplitIdempotent(ValueError):
    """Исключение, возникающее когда идемпотент ограничения не расщепляется"""

    def __init__(self, morphism_id: int):
        self.morphism_id = morphism_id
        self.message = f"Идемпотент ограничения {morphism_id} не расщепляется"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class ElementsFromDifferentObjects(ValueError):
    """Исключение, возникающее когда сравниваются элементы предпучка над разными объектами"""

    def __init__(self, first: tuple[int, int], second: tuple[int, int]):
        self.first = first
        self.second = second
        self.message = f"Элементы {first} и {second} лежат над разными объектами"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class InternalInvariantBreach(RuntimeError):
    """Исключение, возникающее когда нарушен внутренний инвариант построения (ошибка реализации)"""

    def __init__(self, place: str, reason: str):
        """
        :param place: Место, где обнаружено нарушение
        :param reason: Описание нарушения
        """
        self.place = place
        self.reason = reason
        self.message = f"Нарушен внутренний инвариант в {place}: {reason}"
        super().__init__(self.message)

    def __str__(self):
        return self.message
